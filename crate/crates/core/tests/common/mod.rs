#![allow(dead_code)]

use dplab::field::{Field, Grid};
use dplab::profiles::{BumpShape, MeasureComponent, MeasureSpec};
use proptest::prelude::*;

pub fn grid(n: usize) -> Grid {
    Grid::new(20.0, n).expect("valid grid")
}

/// Arbitrary finite samples, no smoothness.
pub fn rough_field(n: usize) -> impl Strategy<Value = Field> {
    prop::collection::vec(-1.0f64..1.0, n).prop_map(move |v| Field::new(grid(n), v).expect("finite"))
}

/// Sum of signed gaussians; smooth on the grid.
pub fn smooth_field(n: usize) -> impl Strategy<Value = Field> {
    prop::collection::vec((-5.0f64..5.0, -2.0f64..2.0, 0.3f64..2.0), 1..5).prop_map(move |bumps| {
        Field::from_fn(grid(n), |x| {
            bumps.iter().map(|&(c, a, w)| a * (-0.5 * ((x - c) / w).powi(2)).exp()).sum()
        })
    })
}

pub fn component() -> impl Strategy<Value = MeasureComponent> {
    (-4.0f64..4.0, 0.1f64..2.0, 0.3f64..1.5, any::<bool>()).prop_map(|(center, mass, width, tri)| {
        MeasureComponent {
            center,
            mass,
            width,
            shape: if tri { BumpShape::Triangular } else { BumpShape::Gaussian },
        }
    })
}

pub fn measure() -> impl Strategy<Value = MeasureSpec> {
    prop::collection::vec(component(), 1..5).prop_map(|components| MeasureSpec { components })
}

pub fn rel_l2(a: &Field, b: &Field) -> f64 {
    a.sub(b).expect("same grid").norm_l2() / b.norm_l2().max(f64::MIN_POSITIVE)
}
