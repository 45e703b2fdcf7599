mod common;

use common::{grid, measure};
use dplab::profiles::{field_from_measure, multipeakon_field, perturbed_peakon, Particle, PeakonState};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measure_fields_have_nonnegative_momentum(spec in measure()) {
        let g = grid(1024);
        let u = field_from_measure(&spec, g).unwrap();
        prop_assert!(u.momentum().min() >= -1e-10);
    }

    #[test]
    fn multipeakon_field_is_linear_in_amplitudes(
        amps in prop::collection::vec(-2.0f64..2.0, 3),
        other in prop::collection::vec(-2.0f64..2.0, 3),
        a in -2.0f64..2.0,
    ) {
        let g = grid(512);
        let qs = [-3.0, 0.5, 4.0];
        let state = |p: &[f64]| PeakonState::new(
            p.iter().zip(qs).map(|(&p, q)| Particle { p, q }).collect()
        ).unwrap();
        let mixed: Vec<f64> = amps.iter().zip(&other).map(|(x, y)| a * x + y).collect();
        let lhs = multipeakon_field(&state(&mixed), g);
        let rhs = multipeakon_field(&state(&amps), g).scale(a).add(&multipeakon_field(&state(&other), g)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn perturbed_peakons_have_nonnegative_momentum(seed in any::<u64>(), eps in 0.005f64..0.05) {
        let g = grid(1024);
        let p = perturbed_peakon(1.0, eps, seed, g).unwrap();
        prop_assert!(p.u0.momentum().min() >= -1e-10);
        prop_assert!(p.x_distance < eps && p.e3_gap < eps);
    }
}
