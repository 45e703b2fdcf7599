//! Weak-form residual of `u_t + ∂x(u²/2 + p∗(3u²/2)) = 0` for closed-form profiles.

use crate::error::{Error, Result};
use crate::field::Grid;
use serde::Serialize;

/// `exp(1 - 1/(1 - r²))` with `r = (x - center)/half_width`; equals 1 at the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestFunction {
    pub center: f64,
    pub half_width: f64,
}

impl TestFunction {
    pub fn value(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.half_width;
        if r.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.half_width;
        if r.abs() >= 1.0 {
            0.0
        } else {
            let q = 1.0 - r * r;
            -2.0 * r / (q * q) * self.value(x) / self.half_width
        }
    }

    /// Support closure excludes `x`.
    pub fn avoids(&self, x: f64) -> bool {
        (x - self.center).abs() > self.half_width
    }
}

/// Ten bumps: six straddle the origin, four stay clear of it.
///
/// Bumps narrower than about `75 dx` lose the trapezoid rule's spectral accuracy.
pub fn default_test_functions() -> Vec<TestFunction> {
    [(0.0, 1.0), (0.0, 2.0), (0.3, 1.0), (-0.5, 1.5), (1.0, 2.5), (-0.2, 0.5), (2.5, 1.5), (-2.5, 1.5), (3.5, 2.0), (-3.5, 2.5)]
        .iter()
        .map(|&(center, half_width)| TestFunction { center, half_width })
        .collect()
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

const GAUSS_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GAUSS_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss(a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS).map(|(&s, &w)| w * f(mid + half * s)).sum::<f64>() * half
}

/// Cell integral split at the kinks strictly inside `(a, b)`.
fn cell_integral(a: f64, b: f64, kinks: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
    let mut left = a;
    let mut total = 0.0;
    for &k in kinks.iter().filter(|&&k| k > a && k < b) {
        total += gauss(left, k, f);
        left = k;
    }
    total + gauss(left, b, f)
}

/// `p∗f` at the nodes for `p = e^{-|x|}/2`, by exponential recurrences with Gauss cells.
pub fn kernel_convolution(grid: &Grid, f: &dyn Fn(f64) -> f64, kinks: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let dx = grid.dx();
    let decay = (-dx).exp();
    let mut fwd = vec![0.0; n];
    let mut bwd = vec![0.0; n];
    for j in 0..n - 1 {
        let (a, b) = (grid.x(j), grid.x(j + 1));
        fwd[j + 1] = decay * fwd[j] + cell_integral(a, b, kinks, &|s| (-(b - s)).exp() * f(s));
    }
    for j in (0..n - 1).rev() {
        let (a, b) = (grid.x(j), grid.x(j + 1));
        bwd[j] = decay * bwd[j + 1] + cell_integral(a, b, kinks, &|s| (-(s - a)).exp() * f(s));
    }
    fwd.iter().zip(&bwd).map(|(a, b)| 0.5 * (a + b)).collect()
}

/// `∫ u_t ψ - (u²/2 + p∗(3u²/2)) ψ'` by the trapezoid rule; `u_sq` must be the continuous
/// extension of `u²`.
pub fn weak_residuals(
    grid: &Grid,
    u_sq: &dyn Fn(f64) -> f64,
    u_t: &dyn Fn(f64) -> f64,
    kinks: &[f64],
    tests: &[TestFunction],
) -> Vec<f64> {
    let nonlocal = kernel_convolution(grid, &|s| 1.5 * u_sq(s), kinks);
    let dx = grid.dx();
    tests
        .iter()
        .map(|psi| {
            (0..grid.len())
                .map(|j| {
                    let x = grid.x(j);
                    u_t(x) * psi.value(x) - (0.5 * u_sq(x) + nonlocal[j]) * psi.derivative(x)
                })
                .sum::<f64>()
                * dx
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub t: f64,
    pub center: f64,
    pub half_width: f64,
    pub away_from_jump: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub points: usize,
    pub rows: Vec<ResidualRow>,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_straddling(&self) -> f64 {
        self.rows.iter().filter(|r| !r.away_from_jump).map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_away(&self) -> Option<f64> {
        self.rows.iter().filter(|r| r.away_from_jump).map(|r| r.residual.abs()).reduce(f64::max)
    }
}

/// `u = -sgn(x) e^{-|x|}/(t+k)` against the default test set at each time.
pub fn shock_weak_residual(k: f64, grid: Grid, times: &[f64]) -> Result<ResidualReport> {
    shock_weak_residual_with(k, grid, times, &default_test_functions())
}

pub fn shock_weak_residual_with(
    k: f64,
    grid: Grid,
    times: &[f64],
    tests: &[TestFunction],
) -> Result<ResidualReport> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!("shock peakon needs k > 0, got {k}")));
    }
    let mut rows = Vec::new();
    for &t in times {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("times must be nonnegative, got {t}")));
        }
        let a = 1.0 / (t + k);
        let u_sq = move |x: f64| a * a * (-2.0 * x.abs()).exp();
        let u_t = move |x: f64| sgn(x) * (-x.abs()).exp() * a * a;
        let res = weak_residuals(&grid, &u_sq, &u_t, &[0.0], tests);
        rows.extend(tests.iter().zip(res).map(|(psi, residual)| ResidualRow {
            t,
            center: psi.center,
            half_width: psi.half_width,
            away_from_jump: psi.avoids(0.0),
            residual,
        }));
    }
    Ok(ResidualReport { points: grid.len(), rows })
}

/// Traveling peakon `c e^{-|x - ct|}` through the same test.
pub fn peakon_weak_residual(c: f64, grid: Grid, times: &[f64], tests: &[TestFunction]) -> Result<ResidualReport> {
    if !c.is_finite() {
        return Err(Error::InvalidParameter("peakon speed must be finite".into()));
    }
    let mut rows = Vec::new();
    for &t in times {
        let x0 = c * t;
        let u_sq = move |x: f64| c * c * (-2.0 * (x - x0).abs()).exp();
        let u_t = move |x: f64| c * c * sgn(x - x0) * (-(x - x0).abs()).exp();
        let res = weak_residuals(&grid, &u_sq, &u_t, &[x0], tests);
        rows.extend(tests.iter().zip(res).map(|(psi, residual)| ResidualRow {
            t,
            center: psi.center,
            half_width: psi.half_width,
            away_from_jump: psi.avoids(x0),
            residual,
        }));
    }
    Ok(ResidualReport { points: grid.len(), rows })
}

/// Max residual per grid and `log2` of successive ratios.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub points: Vec<usize>,
    pub residuals: Vec<f64>,
    pub orders: Vec<f64>,
}

impl RefinementStudy {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn decreasing(&self) -> bool {
        self.residuals.windows(2).all(|w| w[1] < w[0])
    }
}

/// Runs `measure` on grids with the given point counts (each doubling the previous).
pub fn refinement_study(
    half_length: f64,
    points: &[usize],
    measure: impl Fn(Grid) -> Result<f64>,
) -> Result<RefinementStudy> {
    let residuals = points
        .iter()
        .map(|&n| measure(Grid::new(half_length, n)?))
        .collect::<Result<Vec<_>>>()?;
    let orders = residuals
        .windows(2)
        .zip(points.windows(2))
        .map(|(r, p)| (r[0] / r[1]).ln() / (p[1] as f64 / p[0] as f64).ln())
        .collect();
    Ok(RefinementStudy { points: points.to_vec(), residuals, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_convolution_of_exponential() {
        // p∗e^{-2|x|} = (2 e^{-|x|} - e^{-2|x|})/3.
        let g = Grid::new(30.0, 1024).unwrap();
        let conv = kernel_convolution(&g, &|x: f64| (-2.0 * x.abs()).exp(), &[0.0]);
        for j in 0..g.len() {
            let a = g.x(j).abs();
            let exact = (2.0 * (-a).exp() - (-2.0 * a).exp()) / 3.0;
            assert!((conv[j] - exact).abs() < 1e-13, "{j}");
        }
    }

    #[test]
    fn test_function_derivative_matches_difference() {
        let psi = TestFunction { center: 0.4, half_width: 1.3 };
        for x in [-0.5, 0.0, 0.4, 1.2] {
            let h = 1e-6;
            let fd = (psi.value(x + h) - psi.value(x - h)) / (2.0 * h);
            assert!((fd - psi.derivative(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn shock_residual_vanishes_away_from_jump() {
        let r = shock_weak_residual(1.0, Grid::new(40.0, 4096).unwrap(), &[0.0, 0.5]).unwrap();
        assert!(r.max_away().unwrap() < 1e-8, "{:?}", r.max_away());
        assert!(r.max_straddling() < 1e-3);
    }

    #[test]
    fn shock_residual_converges() {
        let study = refinement_study(40.0, &[1024, 2048, 4096], |g| {
            Ok(shock_weak_residual(1.0, g, &[0.5])?.max_residual())
        })
        .unwrap();
        assert!(study.decreasing() && study.min_order() >= 1.0, "{study:?}");
    }

    #[test]
    fn traveling_peakon_residual_converges() {
        let tests = default_test_functions();
        let study = refinement_study(40.0, &[1024, 2048, 4096], |g| {
            // The peak sits on a node of every grid in the study.
            Ok(peakon_weak_residual(1.0, g, &[0.625], &tests)?.max_residual())
        })
        .unwrap();
        assert!(study.decreasing(), "{study:?}");
    }
}
