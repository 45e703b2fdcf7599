//! The `g`/`h` identities, the crucial inequality and the cubic `P`.

use super::extrema::{aggregates, extrema_scan_with, Aggregates, ExtremaProfile, Refinement};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::{Calculus, Profile};
use serde::Serialize;

/// `P(y) = y³ - E2 y / 4 + E3 / 72`.
pub fn cubic_p(e2: f64, e3: f64, y: f64) -> f64 {
    y * y * y - 0.25 * e2 * y + e3 / 72.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootStructure {
    ThreeSimple,
    DoubleAndSimple,
    OneReal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicRoots {
    /// `-(4p³ + 27q²)` of the depressed form `y³ + p y + q`.
    pub discriminant: f64,
    pub structure: RootStructure,
    /// Real roots, ascending, listed once each.
    pub roots: Vec<f64>,
    pub double_root: Option<f64>,
}

/// Relative discriminant below which the double-root structure is reported.
const DOUBLE_ROOT_TOL: f64 = 1e-10;

pub fn cubic_roots(e2: f64, e3: f64) -> CubicRoots {
    let p = -0.25 * e2;
    let q = e3 / 72.0;
    let scale = 4.0 * p.abs().powi(3) + 27.0 * q * q;
    let disc = -(4.0 * p.powi(3) + 27.0 * q * q);
    if p != 0.0 && disc.abs() <= DOUBLE_ROOT_TOL * scale {
        let double = -1.5 * q / p;
        let simple = 3.0 * q / p;
        let mut roots = vec![double, simple];
        roots.sort_by(f64::total_cmp);
        return CubicRoots {
            discriminant: disc,
            structure: RootStructure::DoubleAndSimple,
            roots,
            double_root: Some(double),
        };
    }
    if disc > 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let phi = ((3.0 * q / (p * r)).clamp(-1.0, 1.0)).acos() / 3.0;
        let mut roots: Vec<f64> =
            (0..3).map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos()).collect();
        roots.sort_by(f64::total_cmp);
        CubicRoots { discriminant: disc, structure: RootStructure::ThreeSimple, roots, double_root: None }
    } else {
        let s = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
        let root = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        CubicRoots { discriminant: disc, structure: RootStructure::OneReal, roots: vec![root], double_root: None }
    }
}

/// Identity residuals, the crucial-inequality margin and `P` at `M1` and `A_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub n: usize,
    pub m1: f64,
    pub an: f64,
    pub bn: f64,
    pub e2: f64,
    pub e3: f64,
    pub g2_integral: f64,
    pub hg2_integral: f64,
    pub residual_e2: f64,
    pub residual_e3: f64,
    /// `18 M1 (E2 - 12 A_n²) - (E3 - 144 B_n³)`.
    pub margin_318: f64,
    pub p_at_m1: f64,
    pub p_at_an: f64,
    #[serde(skip)]
    pub extrema: ExtremaProfile,
}

impl StabilityCertificate {
    pub fn relative_residual_e2(&self) -> f64 {
        self.residual_e2 / self.e2.abs()
    }

    pub fn relative_residual_e3(&self) -> f64 {
        self.residual_e3 / self.e3.abs()
    }

    pub fn aggregates(&self) -> Aggregates {
        aggregates(&self.extrema.max_values(), &self.extrema.min_values()).expect("validated at construction")
    }
}

/// `y ≥ -tol` in the calculus' own sense: pointwise for spectral samples, as a measure otherwise.
pub fn momentum_is_nonnegative(u: &Field, calculus: Calculus, rel_tol: f64) -> Result<bool> {
    let rep = crate::evolution::positivity_certificate_tol(u, 1.0, 2.0, calculus, rel_tol)?;
    Ok(rep.check("y").is_some_and(|c| c.passed))
}

/// Relative tolerance on `y ≥ 0` for the hypothesis check.
pub const HYPOTHESIS_TOL: f64 = 1e-8;

pub fn gh_certificate(u: &Field) -> Result<StabilityCertificate> {
    gh_certificate_with(u, Calculus::Spectral)
}

/// Builds `v`, scans its extrema and integrates `g²`, `h g²` over the monotone intervals of `v`.
pub fn gh_certificate_with(u: &Field, calculus: Calculus) -> Result<StabilityCertificate> {
    if !momentum_is_nonnegative(u, calculus, HYPOTHESIS_TOL)? {
        return Err(Error::Precondition("momentum density is negative".into()));
    }
    let prof = Profile::new(u, calculus)?;
    let refinement = match calculus {
        Calculus::Spectral => Refinement::Trigonometric,
        Calculus::KinkAware => Refinement::LocalPolynomial,
    };
    let extrema = extrema_scan_with(&prof.v, None, refinement)?;
    certificate_from(&prof, extrema)
}

pub(crate) fn certificate_from(prof: &Profile, extrema: ExtremaProfile) -> Result<StabilityCertificate> {
    let agg = aggregates(&extrema.max_values(), &extrema.min_values())?;
    let e2 = prof.e2();
    let e3 = prof.e3();

    // Interval boundaries in order ξ1 < η1 < ξ2 < ...; v rises before each ξ and falls after it.
    let mut cuts: Vec<(f64, bool)> = Vec::new();
    let mut i = 0;
    while i < extrema.maxima.len() {
        cuts.push((extrema.maxima[i].x, true));
        if i < extrema.minima.len() {
            cuts.push((extrema.minima[i].x, false));
        }
        i += 1;
    }
    let grid = *prof.u.grid();
    let n = grid.len();
    let (lo, hi) = (grid.x(0), grid.x(n - 1));
    let g_at = |k: usize, j: usize, rising: bool| {
        let (u, v, vx) = (prof.u.pieces()[k].at(j), prof.v.pieces()[k].at(j), prof.vx.pieces()[k].at(j));
        let s = if rising { -1.0 } else { 1.0 };
        let g = 6.0 * v - u + s * 3.0 * vx;
        let h = u + 12.0 * v + s * 6.0 * vx;
        (g * g, h * g * g)
    };
    let mut g2 = 0.0;
    let mut hg2 = 0.0;
    let mut left = lo;
    let mut rising = true;
    for &(x, is_max) in cuts.iter().chain(std::iter::once(&(hi, false))) {
        let r = rising;
        g2 += prof.u.integrate_between_with(left, x, &|k, j| g_at(k, j, r).0);
        hg2 += prof.u.integrate_between_with(left, x, &|k, j| g_at(k, j, r).1);
        left = x;
        rising = !is_max;
    }
    // Wrap cell: falling at the right edge, rising at the left edge.
    let last = prof.u.pieces().len() - 1;
    let (a, b) = (g_at(0, 0, true), g_at(last, n - 1, false));
    g2 += 0.5 * grid.dx() * (a.0 + b.0);
    hg2 += 0.5 * grid.dx() * (a.1 + b.1);

    let sq: f64 = extrema.maxima.iter().map(|e| e.value.powi(2)).sum::<f64>()
        - extrema.minima.iter().map(|e| e.value.powi(2)).sum::<f64>();
    let cube: f64 = extrema.maxima.iter().map(|e| e.value.powi(3)).sum::<f64>()
        - extrema.minima.iter().map(|e| e.value.powi(3)).sum::<f64>();
    Ok(StabilityCertificate {
        n: extrema.n(),
        m1: agg.m1,
        an: agg.an,
        bn: agg.bn,
        e2,
        e3,
        g2_integral: g2,
        hg2_integral: hg2,
        residual_e2: (g2 - (e2 - 12.0 * sq)).abs(),
        residual_e3: (hg2 - (e3 - 144.0 * cube)).abs(),
        margin_318: 18.0 * agg.m1 * (e2 - 12.0 * agg.an * agg.an) - (e3 - 144.0 * agg.bn.powi(3)),
        p_at_m1: cubic_p(e2, e3, agg.m1),
        p_at_an: cubic_p(e2, e3, agg.an),
        extrema,
    })
}

/// `M1 (F2 - 2 A_n²) - (F3 - (4/3) B_n³)` with the extrema taken from `u` itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChReport {
    pub n: usize,
    pub m1: f64,
    pub an: f64,
    pub bn: f64,
    pub f2: f64,
    pub f3: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl ChReport {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

pub fn ch_refined_inequality(u: &Field, calculus: Calculus) -> Result<ChReport> {
    if !momentum_is_nonnegative(u, calculus, HYPOTHESIS_TOL)? {
        return Err(Error::Precondition("momentum density is negative".into()));
    }
    let prof = Profile::new(u, calculus)?;
    let refinement = match calculus {
        Calculus::Spectral => Refinement::Trigonometric,
        Calculus::KinkAware => Refinement::Quadratic,
    };
    let ex = extrema_scan_with(&prof.u, None, refinement)?;
    let agg = aggregates(&ex.max_values(), &ex.min_values())?;
    let (f2, f3) = (prof.f2(), prof.f3());
    Ok(ChReport {
        n: ex.n(),
        m1: agg.m1,
        an: agg.an,
        bn: agg.bn,
        f2,
        f3,
        lhs: f3 - 4.0 / 3.0 * agg.bn.powi(3),
        rhs: agg.m1 * (f2 - 2.0 * agg.an * agg.an),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::profiles::{field_from_measure, peakon_field, BumpShape, MeasureComponent, MeasureSpec};

    #[test]
    fn cubic_at_peakon_invariants() {
        let (e2, e3) = (1.0 / 3.0, 2.0 / 3.0);
        assert!(cubic_p(e2, e3, 1.0 / 6.0).abs() < 1e-15);
        assert!((cubic_p(e2, e3, 0.0) - 1.0 / 108.0).abs() < 1e-17);
        let worst = (0..=2000)
            .map(|i| -1.0 + i as f64 * 1e-3)
            .map(|y| (cubic_p(e2, e3, y) - (y - 1.0 / 6.0).powi(2) * (y + 1.0 / 3.0)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
        let r = cubic_roots(e2, e3);
        assert_eq!(r.structure, RootStructure::DoubleAndSimple);
        assert!((r.double_root.unwrap() - 1.0 / 6.0).abs() < 1e-8);
        assert!((r.roots[0] + 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn cubic_root_classes() {
        let three = cubic_roots(1.0 / 3.0, 0.5);
        assert_eq!(three.structure, RootStructure::ThreeSimple);
        for &y in &three.roots {
            assert!(cubic_p(1.0 / 3.0, 0.5, y).abs() < 1e-14);
        }
        let one = cubic_roots(1.0 / 3.0, 1.0);
        assert_eq!(one.structure, RootStructure::OneReal);
        assert!(cubic_p(1.0 / 3.0, 1.0, one.roots[0]).abs() < 1e-14);
    }

    #[test]
    fn peakon_is_the_equality_case() {
        let g = Grid::new(40.0, 8192).unwrap();
        let c = gh_certificate_with(&peakon_field(1.0, 0.0, g), Calculus::KinkAware).unwrap();
        assert_eq!(c.n, 1);
        assert!(c.g2_integral.abs() < 1e-6, "{}", c.g2_integral);
        assert!(c.residual_e2 < 1e-6 && c.residual_e3 < 1e-6, "{c:?}");
        assert!(c.margin_318.abs() < 1e-6, "{}", c.margin_318);
    }

    #[test]
    fn zero_field_has_no_extrema() {
        let g = Grid::new(40.0, 256).unwrap();
        assert!(matches!(gh_certificate(&Field::zeros(g)), Err(Error::NoExtrema(_))));
    }

    #[test]
    fn smooth_two_bump_identities() {
        let g = Grid::new(40.0, 4096).unwrap();
        let spec = MeasureSpec {
            components: vec![
                MeasureComponent { center: -3.0, mass: 1.0, width: 0.5, shape: BumpShape::Gaussian },
                MeasureComponent { center: 4.0, mass: 0.6, width: 0.8, shape: BumpShape::Triangular },
            ],
        };
        let u = field_from_measure(&spec, g).unwrap();
        let c = gh_certificate(&u).unwrap();
        assert_eq!(c.n, 2);
        assert!(c.relative_residual_e2() < 1e-6, "{c:?}");
        assert!(c.relative_residual_e3() < 1e-6, "{c:?}");
        assert!(c.margin_318 >= -1e-8);
        assert!(c.an >= c.bn && c.an >= c.m1);
    }

    #[test]
    fn ch_peakon_equality() {
        let g = Grid::new(40.0, 8192).unwrap();
        for c in [1.0, 2.5] {
            let r = ch_refined_inequality(&peakon_field(c, 0.0, g), Calculus::KinkAware).unwrap();
            assert!(r.margin().abs() < 1e-5 * c.powi(3), "{r:?}");
        }
    }
}
