//! Initial data: peakons, multipeakons, shock peakons, and fields built
//! from nonnegative momentum measures.

use crate::error::{Error, Result};
use crate::field::{inverse_real, mode_index, Field, Grid};
use crate::functionals::{e3, x_distance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default mollifier width for smooth runs; below the 4096-point spacing on L = 40.
pub const DEFAULT_MOLLIFIER_WIDTH: f64 = 0.005;
pub const MAX_RESCALINGS: usize = 100;
/// Width, in grid cells, of the smoothing applied to triangular bumps.
pub const TRIANGLE_SOFTENING: f64 = 2.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpShape {
    #[default]
    Gaussian,
    Triangular,
}

/// One bump of momentum density. `mass` may be negative only inside a [`SignedMeasureSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureComponent {
    pub center: f64,
    pub mass: f64,
    pub width: f64,
    #[serde(default)]
    pub shape: BumpShape,
}

/// Nonnegative mixture for y0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasureSpec {
    pub components: Vec<MeasureComponent>,
}

/// Mixture with signed masses; used for wave-breaking data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignedMeasureSpec {
    pub components: Vec<MeasureComponent>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Particle {
    pub p: f64,
    pub q: f64,
}

/// Amplitudes and positions of a multipeakon; positions strictly increase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PeakonState {
    pub particles: Vec<Particle>,
}

impl PeakonState {
    pub fn new(particles: Vec<Particle>) -> Result<Self> {
        let s = Self { particles };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles.is_empty() {
            return Err(Error::InvalidParameter("peakon state has no particles".into()));
        }
        for (i, pt) in self.particles.iter().enumerate() {
            if !(pt.p.is_finite() && pt.q.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            if i > 0 && pt.q <= self.particles[i - 1].q {
                return Err(Error::InvalidParameter(format!(
                    "positions must strictly increase (q_{} = {} after {})",
                    i, pt.q, self.particles[i - 1].q
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

/// `c e^{-|x - x0|}` with circle distance, sampled pointwise.
pub fn peakon_field(c: f64, x0: f64, grid: Grid) -> Field {
    Field::from_fn(grid, |x| c * (-grid.periodic_offset(x, x0).abs()).exp())
}

/// Band-limited projection of the periodized peakon built from its exact Fourier coefficients.
///
/// Equals `(1 - d^2)^{-1}` of a grid-scale delta of mass `2c` when `x0` is a node.
pub fn peakon_field_resolved(c: f64, x0: f64, grid: Grid) -> Field {
    let n = grid.len();
    let l = grid.half_length();
    let tail = (-l).exp();
    let hat: Vec<Complex64> = (0..n)
        .map(|j| {
            let m = mode_index(j, n);
            let k = grid.wavenumber(m);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let a = c * (1.0 - sign * tail) / (l * (1.0 + k * k));
            let theta = -k * (x0 + l);
            if j == n / 2 {
                Complex64::new(n as f64 * a * theta.cos(), 0.0)
            } else {
                Complex64::from_polar(n as f64 * a, theta)
            }
        })
        .collect();
    Field::from_raw(grid, inverse_real(hat))
}

/// Closed-form `(4 - d^2)^{-1}` of `c e^{-|x|}`.
pub fn peakon_v_exact(c: f64, x: f64) -> f64 {
    let a = x.abs();
    c * ((-a).exp() / 3.0 - (-2.0 * a).exp() / 6.0)
}

/// Value of `-(1/(t+k)) sgn(x) e^{-|x|}`; zero at the jump.
pub fn shock_peakon_value(k: f64, t: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x.signum() * (-x.abs()).exp() / (t + k)
    }
}

pub fn shock_peakon_field(k: f64, t: f64, grid: Grid) -> Result<Field> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!("shock peakon needs k > 0, got {k}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("shock peakon needs t >= 0, got {t}")));
    }
    Ok(Field::from_fn(grid, |x| shock_peakon_value(k, t, x)))
}

/// `sum_i p_i e^{-|x - q_i|}`, sampled pointwise.
pub fn multipeakon_field(state: &PeakonState, grid: Grid) -> Field {
    Field::from_fn(grid, |x| {
        state
            .particles
            .iter()
            .map(|pt| pt.p * (-grid.periodic_offset(x, pt.q).abs()).exp())
            .sum()
    })
}

/// Sum of [`peakon_field_resolved`] terms.
pub fn multipeakon_field_resolved(state: &PeakonState, grid: Grid) -> Field {
    let mut acc = vec![0.0; grid.len()];
    for pt in &state.particles {
        for (a, v) in acc.iter_mut().zip(peakon_field_resolved(pt.p, pt.q, grid).values()) {
            *a += v;
        }
    }
    Field::from_raw(grid, acc)
}

fn bump_samples(comp: &MeasureComponent, grid: Grid) -> Vec<f64> {
    let w = comp.width;
    let mut s: Vec<f64> = (0..grid.len())
        .map(|j| {
            let r = grid.periodic_offset(grid.x(j), comp.center) / w;
            match comp.shape {
                BumpShape::Gaussian => (-0.5 * r * r).exp(),
                BumpShape::Triangular => (1.0 - r.abs()).max(0.0),
            }
        })
        .collect();
    let total: f64 = s.iter().sum::<f64>() * grid.dx();
    if total > 0.0 {
        s.iter_mut().for_each(|v| *v *= comp.mass / total);
    } else {
        s.iter_mut().for_each(|v| *v = 0.0);
        s[grid.nearest_node(comp.center)] = comp.mass / grid.dx();
    }
    if comp.shape == BumpShape::Triangular {
        s = soften_kinks(s, grid);
    }
    s
}

/// Gaussian smoothing over `TRIANGLE_SOFTENING` cells; keeps the band-limited interpolant of a
/// hat nonnegative between nodes.
fn soften_kinks(samples: Vec<f64>, grid: Grid) -> Vec<f64> {
    let sigma = TRIANGLE_SOFTENING * grid.dx();
    Field::from_raw(grid, samples)
        .apply_multiplier(
            |k| Complex64::new((-0.5 * (k * sigma).powi(2)).exp(), 0.0),
            |k| Complex64::new((-0.5 * (k * sigma).powi(2)).exp(), 0.0),
        )
        .into_values()
}

fn check_component(comp: &MeasureComponent, grid: Grid, signed: bool) -> Result<()> {
    if !comp.mass.is_finite() || (!signed && comp.mass < 0.0) {
        return Err(Error::InvalidParameter(format!("bump mass must be nonnegative, got {}", comp.mass)));
    }
    if !(comp.width.is_finite() && comp.width > 0.0) {
        return Err(Error::InvalidParameter(format!("bump width must be positive, got {}", comp.width)));
    }
    let half = 0.5 * grid.half_length();
    if !(comp.center > -half && comp.center < half) {
        return Err(Error::InvalidParameter(format!(
            "bump center {} outside (-{half}, {half})",
            comp.center
        )));
    }
    Ok(())
}

fn momentum_from(components: &[MeasureComponent], grid: Grid) -> Field {
    let mut y = vec![0.0; grid.len()];
    for comp in components {
        for (a, b) in y.iter_mut().zip(bump_samples(comp, grid)) {
            *a += b;
        }
    }
    Field::from_raw(grid, y)
}

/// Samples of y0 for a nonnegative mixture (bumps normalized to their discrete mass).
pub fn momentum_from_measure(spec: &MeasureSpec, grid: Grid) -> Result<Field> {
    for comp in &spec.components {
        check_component(comp, grid, false)?;
    }
    Ok(momentum_from(&spec.components, grid))
}

/// `u0 = (1 - d^2)^{-1} y0` for a nonnegative mixture.
pub fn field_from_measure(spec: &MeasureSpec, grid: Grid) -> Result<Field> {
    momentum_from_measure(spec, grid)?.helmholtz_inverse(1.0)
}

/// `u0 = (1 - d^2)^{-1} y0` with signed masses allowed.
pub fn field_from_signed_measure(spec: &SignedMeasureSpec, grid: Grid) -> Result<Field> {
    for comp in &spec.components {
        check_component(comp, grid, true)?;
    }
    momentum_from(&spec.components, grid).helmholtz_inverse(1.0)
}

/// Single gaussian bump of mass `2c` at `x0`.
pub fn mollified_peakon(c: f64, x0: f64, width: f64, grid: Grid) -> Result<Field> {
    if c < 0.0 {
        let pos = mollified_peakon(-c, x0, width, grid)?;
        return Ok(pos.scale(-1.0));
    }
    field_from_measure(
        &MeasureSpec {
            components: vec![MeasureComponent { center: x0, mass: 2.0 * c, width, shape: BumpShape::Gaussian }],
        },
        grid,
    )
}

/// Seeded nonnegative mixture of one to four bumps centered within a quarter of the domain.
pub fn random_measure(seed: u64, grid: Grid) -> MeasureSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = 0.25 * grid.half_length();
    let count = rng.gen_range(1..=4);
    MeasureSpec {
        components: (0..count)
            .map(|_| MeasureComponent {
                center: rng.gen_range(-reach..reach),
                mass: rng.gen_range(0.2..2.0),
                width: rng.gen_range(0.25..1.5),
                shape: if rng.gen_bool(0.5) { BumpShape::Gaussian } else { BumpShape::Triangular },
            })
            .collect(),
    }
}

/// Admissible perturbation of a mollified peakon together with how it was found.
#[derive(Clone, Debug)]
pub struct PerturbedPeakon {
    pub u0: Field,
    pub perturbation: MeasureSpec,
    pub scale: f64,
    pub halvings: usize,
    pub x_distance: f64,
    pub e3_gap: f64,
}

/// Seeded random nonnegative perturbation, halved until both smallness conditions hold against
/// the grid representation of `c φ`.
pub fn perturbed_peakon(c: f64, eps: f64, seed: u64, grid: Grid) -> Result<PerturbedPeakon> {
    perturbed_peakon_with_width(c, eps, seed, grid, DEFAULT_MOLLIFIER_WIDTH)
}

pub fn perturbed_peakon_with_width(
    c: f64,
    eps: f64,
    seed: u64,
    grid: Grid,
    width: f64,
) -> Result<PerturbedPeakon> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("peakon speed must be positive, got {c}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.5 * grid.half_length();
    let count = rng.gen_range(1..=3);
    let shape: Vec<MeasureComponent> = (0..count)
        .map(|_| MeasureComponent {
            center: rng.gen_range(-0.9 * half..0.9 * half),
            mass: rng.gen_range(0.2..1.0),
            width: rng.gen_range(0.25..1.0),
            shape: if rng.gen_bool(0.5) { BumpShape::Gaussian } else { BumpShape::Triangular },
        })
        .collect();
    let base = MeasureComponent { center: 0.0, mass: 2.0 * c, width, shape: BumpShape::Gaussian };
    let reference = peakon_field_resolved(c, 0.0, grid);
    let e3_ref = e3(&reference);
    let mut scale = c;
    for halvings in 0..=MAX_RESCALINGS {
        let perturbation = MeasureSpec {
            components: shape.iter().map(|b| MeasureComponent { mass: b.mass * scale, ..*b }).collect(),
        };
        let mut all = vec![base];
        all.extend(perturbation.components.iter().copied());
        let u0 = field_from_measure(&MeasureSpec { components: all }, grid)?;
        let dist = x_distance(&u0, &reference)?;
        let gap = (e3(&u0) - e3_ref).abs();
        if dist < c * eps && gap < c.powi(3) * eps {
            return Ok(PerturbedPeakon { u0, perturbation, scale, halvings, x_distance: dist, e3_gap: gap });
        }
        scale *= 0.5;
    }
    Err(Error::Inadmissible(MAX_RESCALINGS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{e2, invariant_suite};

    fn g(n: usize) -> Grid {
        Grid::new(40.0, n).unwrap()
    }

    #[test]
    fn peakon_samples() {
        let grid = g(4096);
        let u = peakon_field(1.0, 0.0, grid);
        assert_eq!(u.values()[grid.nearest_node(0.0)], 1.0);
    }

    #[test]
    fn resolved_peakon_matches_grid_delta() {
        let grid = g(1024);
        let r = peakon_field_resolved(1.5, 0.0, grid);
        let mut y = vec![0.0; grid.len()];
        y[grid.nearest_node(0.0)] = 3.0 / grid.dx();
        let d = Field::new(grid, y).unwrap().helmholtz_inverse(1.0).unwrap();
        assert!(r.sub(&d).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn resolved_peakon_is_translation_covariant() {
        let grid = g(1024);
        let a = peakon_field_resolved(1.0, 3.0 * grid.dx(), grid);
        let b = peakon_field_resolved(1.0, 0.0, grid).shifted(3);
        assert!(a.sub(&b).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn v_exact_values() {
        assert!((peakon_v_exact(1.0, 0.0) - 1.0 / 6.0).abs() < 1e-16);
        assert!((peakon_v_exact(1.0, 2f64.ln()) - 0.125).abs() < 1e-15);
        assert!(peakon_v_exact(1.0, 60.0).abs() < 1e-20);
        assert!(peakon_v_exact(1.0, -60.0).abs() < 1e-20);
    }

    #[test]
    fn v_exact_agrees_with_spectral_inverse_at_8192() {
        let grid = g(8192);
        let v = peakon_field_resolved(1.0, 0.0, grid).helmholtz_inverse(2.0).unwrap();
        let err = (0..grid.len())
            .map(|j| (v.values()[j] - peakon_v_exact(1.0, grid.x(j))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn shock_peakon_limits_and_decay() {
        assert!((shock_peakon_value(1.0, 0.0, 1e-12) + 1.0).abs() < 1e-11);
        assert!((shock_peakon_value(1.0, 0.0, -1e-12) - 1.0).abs() < 1e-11);
        assert_eq!(shock_peakon_value(1.0, 0.0, 0.0), 0.0);
        let grid = g(4096);
        let u = shock_peakon_field(1.0, 1.0, grid).unwrap();
        assert!((u.max_abs() - 0.5 * (-grid.dx()).exp()).abs() < 1e-15);
        assert!(u.integrate().abs() < 1e-10);
        assert!(shock_peakon_field(0.0, 1.0, grid).is_err());
        assert!(shock_peakon_field(1.0, -0.1, grid).is_err());
    }

    #[test]
    fn multipeakon_examples() {
        let grid = g(4096);
        let single = PeakonState::new(vec![Particle { p: 1.3, q: 0.0 }]).unwrap();
        assert_eq!(multipeakon_field(&single, grid), peakon_field(1.3, 0.0, grid));
        let odd = PeakonState::new(vec![Particle { p: 1.0, q: -3.0 }, Particle { p: -1.0, q: 3.0 }]).unwrap();
        assert!(multipeakon_field(&odd, grid).integrate().abs() < 1e-10);
        let even = PeakonState::new(vec![Particle { p: 1.0, q: -3.0 }, Particle { p: 1.0, q: 3.0 }]).unwrap();
        let u = multipeakon_field(&even, grid);
        assert!((u.values()[grid.nearest_node(0.0)] - 2.0 * (-3.0f64).exp()).abs() < 1e-12);
        assert!(PeakonState::new(vec![Particle { p: 1.0, q: 3.0 }, Particle { p: 1.0, q: 3.0 }]).is_err());
    }

    #[test]
    fn measure_constructions() {
        let grid = g(4096);
        assert_eq!(field_from_measure(&MeasureSpec::default(), grid).unwrap().max_abs(), 0.0);
        let bad = MeasureSpec {
            components: vec![MeasureComponent { center: 0.0, mass: -1.0, width: 0.1, shape: BumpShape::Gaussian }],
        };
        assert!(field_from_measure(&bad, grid).is_err());
        let two = MeasureSpec {
            components: vec![
                MeasureComponent { center: -2.0, mass: 2.0, width: 0.3, shape: BumpShape::Gaussian },
                MeasureComponent { center: 4.0, mass: 1.0, width: 0.5, shape: BumpShape::Triangular },
            ],
        };
        // Tails must stay above roundoff for strict positivity to be observable.
        let u = field_from_measure(&two, Grid::new(20.0, 2048).unwrap()).unwrap();
        assert!(u.min() > 0.0);
        assert!(u.momentum().min() >= -1e-10 * u.max_abs());
    }

    #[test]
    fn mollified_peakon_converges_linearly_in_width() {
        let grid = g(8192);
        let phi = peakon_field(1.0, 0.0, grid);
        let errs: Vec<f64> = [0.08, 0.04, 0.02]
            .iter()
            .map(|&w| mollified_peakon(1.0, 0.0, w, grid).unwrap().sub(&phi).unwrap().max_abs())
            .collect();
        assert!(errs[2] <= 0.02, "{errs:?}");
        for pair in errs.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(ratio > 1.6 && ratio < 2.4, "{errs:?}");
        }
    }

    #[test]
    fn perturbed_peakon_is_admissible() {
        let grid = g(4096);
        let p = perturbed_peakon(1.0, 0.01, 7, grid).unwrap();
        let phi = peakon_field_resolved(1.0, 0.0, grid);
        assert!(x_distance(&p.u0, &phi).unwrap() < 0.01);
        assert!((e3(&p.u0) - e3(&phi)).abs() < 0.01);
        assert!((e3(&phi) - 2.0 / 3.0).abs() < 1e-6);
        assert!(p.u0.momentum().min() >= -1e-10 * p.u0.max_abs());
        let again = perturbed_peakon(1.0, 0.01, 7, grid).unwrap();
        assert_eq!(p.u0, again.u0);
    }

    #[test]
    fn perturbation_thresholds_scale_with_c() {
        let grid = g(4096);
        let p = perturbed_peakon(2.0, 0.01, 3, grid).unwrap();
        assert!(p.x_distance < 0.02 && p.e3_gap < 0.08);
        let phi2 = peakon_field_resolved(2.0, 0.0, grid);
        assert!((e2(&phi2) - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn vanishing_eps_returns_the_mollified_peakon() {
        let grid = g(4096);
        let base = mollified_peakon(1.0, 0.0, DEFAULT_MOLLIFIER_WIDTH, grid).unwrap();
        let p = perturbed_peakon(1.0, 1e-3, 11, grid).unwrap();
        assert!(x_distance(&p.u0, &base).unwrap() < 2e-3);
        let q = perturbed_peakon(1.0, 1e-5, 11, grid).unwrap();
        assert!(x_distance(&q.u0, &base).unwrap() < x_distance(&p.u0, &base).unwrap());
        assert!(x_distance(&q.u0, &base).unwrap() < 2e-5);
        let _ = invariant_suite(&q.u0, 0.0);
    }

    #[test]
    fn perturbed_peakon_rejects_bad_eps() {
        let grid = g(256);
        assert!(perturbed_peakon(1.0, 0.0, 1, grid).is_err());
        assert!(perturbed_peakon(1.0, 0.5, 1, grid).is_err());
    }
}
