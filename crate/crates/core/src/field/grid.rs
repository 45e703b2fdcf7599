use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_HALF_LENGTH: f64 = 40.0;
pub const DEFAULT_POINTS: usize = 4096;

/// Uniform periodic grid on `[-L, L)` with nodes `x_j = -L + j dx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_length: f64,
    points: usize,
}

impl Grid {
    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        if points < 16 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "point count must be even and at least 16, got {points}"
            )));
        }
        Ok(Self { half_length, points })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn dx(&self) -> f64 {
        self.period() / self.points as f64
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumber of signed mode `m`.
    #[inline]
    pub fn wavenumber(&self, m: i64) -> f64 {
        PI * m as f64 / self.half_length
    }

    /// Shortest signed displacement from `b` to `a` on the circle.
    #[inline]
    pub fn periodic_offset(&self, a: f64, b: f64) -> f64 {
        let p = self.period();
        let d = (a - b).rem_euclid(p);
        if d >= 0.5 * p {
            d - p
        } else {
            d
        }
    }

    /// Index of the node nearest to `x` (periodically wrapped).
    pub fn nearest_node(&self, x: f64) -> usize {
        let s = ((x + self.half_length) / self.dx()).round();
        (s.rem_euclid(self.points as f64)) as usize % self.points
    }

    /// Fails unless `x` lies in `[-L, L)`.
    pub fn check_inside(&self, x: f64) -> Result<()> {
        if x.is_finite() && x >= -self.half_length && x < self.half_length {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x, lo: -self.half_length, hi: self.half_length })
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self { half_length: DEFAULT_HALF_LENGTH, points: DEFAULT_POINTS }
    }
}
