//! Sign certificates for the data and growth bounds along a run.

use super::Trajectory;
use crate::error::Result;
use crate::field::{Field, Pieces};
use crate::functionals::{kink_nodes, Calculus};
use serde::Serialize;

/// Slack on `u_x ≥ -|u|`, relative to `‖u0‖∞`; absorbs Gibbs ripple next to a steep front.
pub const DEFAULT_SLOPE_TOLERANCE: f64 = 0.15;

/// Static certificate tolerance, relative to `‖u‖∞`.
const CERTIFICATE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Smallest value of the checked quantity.
    pub worst: f64,
    pub location: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityReport {
    pub k1: f64,
    pub k2: f64,
    pub tolerance: f64,
    pub checks: Vec<CheckOutcome>,
}

impl PositivityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn worst(&self) -> &CheckOutcome {
        self.checks
            .iter()
            .min_by(|a, b| a.worst.total_cmp(&b.worst))
            .expect("report has checks")
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn outcome(name: String, samples: impl Iterator<Item = (f64, f64)>, floor: f64) -> CheckOutcome {
    let (worst, location) = samples.fold((f64::INFINITY, 0.0), |b, s| if s.0 < b.0 { s } else { b });
    CheckOutcome { name, worst, location, passed: worst >= floor }
}

fn field_samples(f: &Field) -> impl Iterator<Item = (f64, f64)> + '_ {
    let g = *f.grid();
    f.values().iter().enumerate().map(move |(j, &v)| (v, g.x(j)))
}

fn piece_samples(p: &Pieces) -> impl Iterator<Item = (f64, f64)> + '_ {
    let g = *p.grid();
    p.pieces().iter().flat_map(move |pc| (pc.lo..=pc.hi).map(move |i| (pc.at(i), g.x(i))))
}

fn sign_label(s: f64) -> &'static str {
    if s > 0.0 {
        "+"
    } else {
        "-"
    }
}

/// Spectral certificate: `u ≥ 0`, `y ≥ 0`, `(k1 ± ∂)u ≥ 0`, `(k2 ± ∂)(4 - ∂²)⁻¹(k1 ± ∂)u ≥ 0`.
pub fn positivity_certificate(u: &Field, k1: f64, k2: f64) -> PositivityReport {
    positivity_certificate_with(u, k1, k2, Calculus::Spectral).expect("spectral path is infallible")
}

/// Certificate under a chosen calculus; `KinkAware` treats `y` as a measure whose atoms are the
/// slope jumps at the local extrema of `u`.
pub fn positivity_certificate_with(
    u: &Field,
    k1: f64,
    k2: f64,
    calculus: Calculus,
) -> Result<PositivityReport> {
    positivity_certificate_tol(u, k1, k2, calculus, CERTIFICATE_TOLERANCE)
}

/// Same checks with the relative tolerance supplied by the caller.
pub fn positivity_certificate_tol(
    u: &Field,
    k1: f64,
    k2: f64,
    calculus: Calculus,
    relative_tolerance: f64,
) -> Result<PositivityReport> {
    let tolerance = relative_tolerance * u.max_abs();
    let floor = -tolerance;
    let mut checks = Vec::new();
    checks.push(outcome("u".into(), field_samples(u), floor));
    match calculus {
        Calculus::Spectral => {
            let y = u.momentum();
            checks.push(outcome("y".into(), field_samples(&y), floor));
            let ux = u.derivative();
            for s1 in [1.0, -1.0] {
                let w = u.zip_with(&ux, |a, b| k1 * a + s1 * b)?;
                checks.push(outcome(format!("(k1{}d)u", sign_label(s1)), field_samples(&w), floor));
                let h = w.helmholtz_inverse(2.0)?;
                let hx = h.derivative();
                for s2 in [1.0, -1.0] {
                    let z = h.zip_with(&hx, |a, b| k2 * a + s2 * b)?;
                    checks.push(outcome(
                        format!("(k2{}d)H(k1{}d)u", sign_label(s2), sign_label(s1)),
                        field_samples(&z),
                        floor,
                    ));
                }
            }
        }
        Calculus::KinkAware => {
            let pu = Pieces::split(u, &kink_nodes(u));
            let ux = pu.derivative();
            let y = pu.zip(&pu.second_derivative(), |a, b| a - b)?;
            let mut ysamples: Vec<(f64, f64)> = piece_samples(&y).collect();
            // An atom of y at a break has mass -(u_x(+) - u_x(-)).
            let g = *u.grid();
            for k in 1..ux.pieces().len() {
                let (left, right) = (&ux.pieces()[k - 1], &ux.pieces()[k]);
                let atom = left.at(left.hi) - right.at(right.lo);
                ysamples.push((atom, g.x(right.lo)));
            }
            checks.push(outcome("y".into(), ysamples.into_iter(), floor));
            for s1 in [1.0, -1.0] {
                let w = pu.zip(&ux, |a, b| k1 * a + s1 * b)?;
                checks.push(outcome(format!("(k1{}d)u", sign_label(s1)), piece_samples(&w), floor));
                let (h, hx) = w.helmholtz_inverse(2.0)?;
                for s2 in [1.0, -1.0] {
                    let z = h.zip(&hx, |a, b| k2 * a + s2 * b)?;
                    checks.push(outcome(
                        format!("(k2{}d)H(k1{}d)u", sign_label(s2), sign_label(s1)),
                        piece_samples(&z),
                        floor,
                    ));
                }
            }
        }
    }
    Ok(PositivityReport { k1, k2, tolerance, checks })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnapshotMonitor {
    pub t: f64,
    pub linf: f64,
    pub linf_bound: f64,
    /// `‖u‖₁² = ∫ u² + u_x²`.
    pub h1_sq: f64,
    pub h1_sq_bound: f64,
    /// `min (u_x + |u|) + tol`; absent when the snapshot was not kept.
    pub slope_margin: Option<f64>,
}

impl SnapshotMonitor {
    pub fn linf_margin(&self) -> f64 {
        self.linf_bound - self.linf
    }

    pub fn h1_margin(&self) -> f64 {
        self.h1_sq_bound - self.h1_sq
    }

    pub fn passed(&self) -> bool {
        self.linf_margin() >= 0.0 && self.h1_margin() >= 0.0 && self.slope_margin.map_or(true, |m| m >= 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AprioriReport {
    pub slope_tolerance: f64,
    pub snapshots: Vec<SnapshotMonitor>,
}

impl AprioriReport {
    pub fn passed(&self) -> bool {
        self.snapshots.iter().all(SnapshotMonitor::passed)
    }

    pub fn min_linf_margin(&self) -> f64 {
        self.snapshots.iter().map(SnapshotMonitor::linf_margin).fold(f64::INFINITY, f64::min)
    }

    pub fn min_h1_margin(&self) -> f64 {
        self.snapshots.iter().map(SnapshotMonitor::h1_margin).fold(f64::INFINITY, f64::min)
    }

    pub fn min_slope_margin(&self) -> Option<f64> {
        self.snapshots.iter().filter_map(|s| s.slope_margin).reduce(f64::min)
    }
}

/// Sup-norm growth, `H¹` growth and `u_x ≥ -|u|` along a trajectory.
pub fn apriori_monitors(traj: &Trajectory) -> AprioriReport {
    apriori_monitors_with(traj, DEFAULT_SLOPE_TOLERANCE)
}

pub fn apriori_monitors_with(traj: &Trajectory, relative_slope_tolerance: f64) -> AprioriReport {
    let Some(u0) = traj.snapshots.first() else {
        return AprioriReport { slope_tolerance: 0.0, snapshots: Vec::new() };
    };
    let rec0 = traj.records[0];
    let l2sq = u0.norm_l2().powi(2);
    let linf0 = rec0.max_abs;
    let h1sq0 = rec0.f2;
    let tol = relative_slope_tolerance * linf0;
    let keep_all = traj.has_all_snapshots();
    let snapshots = traj
        .records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let t = rec.t;
            let slope_margin = keep_all.then(|| {
                let u = &traj.snapshots[i];
                let ux = u.derivative();
                u.values().iter().zip(ux.values()).map(|(a, b)| b + a.abs()).fold(f64::INFINITY, f64::min) + tol
            });
            SnapshotMonitor {
                t,
                linf: rec.max_abs,
                linf_bound: 3.0 * l2sq * t + linf0,
                h1_sq: rec.f2,
                h1_sq_bound: 6.0 * l2sq * l2sq * t * t + 4.0 * l2sq * linf0 * t + h1sq0,
                slope_margin,
            }
        })
        .collect();
    AprioriReport { slope_tolerance: tol, snapshots }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::profiles::{mollified_peakon, peakon_field};

    #[test]
    fn mollified_peakon_is_certified() {
        let g = Grid::new(40.0, 2048).unwrap();
        let u = mollified_peakon(1.0, 0.0, 0.5, g).unwrap();
        let r = positivity_certificate(&u, 1.0, 2.0);
        assert!(r.passed(), "{:?}", r.worst());
        assert_eq!(r.checks.len(), 8);
    }

    #[test]
    fn antipeakon_fails_sign_check_at_origin() {
        let g = Grid::new(40.0, 2048).unwrap();
        let u = peakon_field(-1.0, 0.0, g);
        let r = positivity_certificate_with(&u, 1.0, 2.0, Calculus::KinkAware).unwrap();
        let c = r.check("u").unwrap();
        assert!(!c.passed);
        assert!((c.worst + 1.0).abs() < 1e-12 && c.location.abs() < 1e-12);
    }

    #[test]
    fn raw_peakon_one_sided_certificate() {
        let g = Grid::new(40.0, 4096).unwrap();
        let u = peakon_field(1.0, 0.0, g);
        let r = positivity_certificate_with(&u, 1.0, 2.0, Calculus::KinkAware).unwrap();
        assert!(r.passed(), "{:?}", r.worst());
        let c = r.check("(k1+d)u").unwrap();
        assert!(c.worst.abs() < 1e-8);
    }
}
