//! Distance to the aligned peakon and the orbital-stability verdict along a run.

use super::certificate::{momentum_is_nonnegative, HYPOTHESIS_TOL};
use super::extrema::{aggregates, extrema_scan_slack, Refinement};
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::field::Field;
use crate::functionals::{x_distance, Calculus, Profile};
use crate::profiles::peakon_field_resolved;
use serde::Serialize;

/// Values of the distance identity below `-NEGATIVE_GATE` are reported as errors.
pub const NEGATIVE_GATE: f64 = 1e-10;

/// Slack on `v ≥ 0` for states that skip the hypothesis check, relative to `max v`.
pub const EVOLVED_SLACK: f64 = 1e-4;

/// The three bounds derived from `|E2(u) - E2(cφ)| ≤ c²δ` and `|E3(u) - E3(cφ)| ≤ c³δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma37 {
    pub delta: f64,
    pub hypotheses_hold: bool,
    pub m1_deviation: f64,
    pub an_deviation: f64,
    pub sum_sq: f64,
    /// `c √δ`, shared by the `M1` and `A_n` bounds.
    pub deviation_bound: f64,
    /// `(4/3) c² √δ`.
    pub sum_bound: f64,
}

impl Lemma37 {
    pub fn bounds_hold(&self) -> bool {
        self.m1_deviation < self.deviation_bound
            && self.an_deviation < self.deviation_bound
            && self.sum_sq < self.sum_bound
    }
}

pub fn lemma37(c: f64, delta: f64, e2: f64, e3: f64, m1: f64, an: f64, sum_sq: f64) -> Lemma37 {
    let hypotheses_hold = (e2 - c * c / 3.0).abs() <= c * c * delta
        && (e3 - 2.0 * c.powi(3) / 3.0).abs() <= c.powi(3) * delta
        && delta > 0.0
        && delta < 1.0;
    Lemma37 {
        delta,
        hypotheses_hold,
        m1_deviation: (m1 - c / 6.0).abs(),
        an_deviation: (an - c / 6.0).abs(),
        sum_sq,
        deviation_bound: c * delta.sqrt(),
        sum_bound: 4.0 / 3.0 * c * c * delta.sqrt(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProximityReport {
    pub c: f64,
    pub xi1: f64,
    pub m1: f64,
    pub an: f64,
    pub sum_sq: f64,
    pub e2: f64,
    pub e3: f64,
    /// `E2(u) + c²/3 - 4 c v_u(ξ1)` before clipping.
    pub distance_sq_raw: f64,
    pub distance: f64,
    /// `‖u - c φ(· - ξ1)‖_X` against the band-limited peakon.
    pub direct_distance: f64,
    /// `0 < M1 ≤ A_n ≤ sqrt(E2/12)` within `1e-10`.
    pub chain_holds: bool,
    pub lemma37: Option<Lemma37>,
}

/// Distance from the identity with `ξ1 = argmax v_u`, cross-checked directly.
pub fn peakon_proximity(
    u: &Field,
    c: f64,
    calculus: Calculus,
    delta: Option<f64>,
) -> Result<ProximityReport> {
    if !momentum_is_nonnegative(u, calculus, HYPOTHESIS_TOL)? {
        return Err(Error::Precondition("momentum density is negative".into()));
    }
    proximity_unchecked(u, c, calculus, delta)
}

/// [`peakon_proximity`] without the hypothesis check; evolved band-limited states can carry
/// small negative ripples in `y` that the continuum solution does not have.
pub fn proximity_unchecked(
    u: &Field,
    c: f64,
    calculus: Calculus,
    delta: Option<f64>,
) -> Result<ProximityReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("peakon speed must be positive, got {c}")));
    }
    let prof = Profile::new(u, calculus)?;
    let refinement = match calculus {
        Calculus::Spectral => Refinement::Trigonometric,
        Calculus::KinkAware => Refinement::LocalPolynomial,
    };
    let ex = extrema_scan_slack(&prof.v, None, refinement, EVOLVED_SLACK)?;
    let agg = aggregates(&ex.max_values(), &ex.min_values())?;
    let top = ex.top();
    let (e2, e3) = (prof.e2(), prof.e3());
    let raw = e2 + c * c / 3.0 - 4.0 * c * top.value;
    if raw < -NEGATIVE_GATE {
        return Err(Error::NegativeDistance(raw));
    }
    let direct_distance = x_distance(u, &peakon_field_resolved(c, top.x, *u.grid()))?;
    let chain_holds = agg.m1 > 0.0
        && agg.m1 <= agg.an + 1e-10
        && agg.an <= (e2 / 12.0).max(0.0).sqrt() + 1e-10;
    Ok(ProximityReport {
        c,
        xi1: top.x,
        m1: agg.m1,
        an: agg.an,
        sum_sq: agg.sum_sq,
        e2,
        e3,
        distance_sq_raw: raw,
        distance: raw.max(0.0).sqrt(),
        direct_distance,
        chain_holds,
        lemma37: delta.map(|d| lemma37(c, d, e2, e3, agg.m1, agg.an, agg.sum_sq)),
    })
}

/// Thresholds `3 c ε^{1/4}`, `c √(2ε)` and `2 c² √ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Theorem1Bounds {
    pub distance: f64,
    pub m1_halfwidth: f64,
    pub sum_sq: f64,
}

impl Theorem1Bounds {
    pub fn new(c: f64, eps: f64) -> Self {
        Self { distance: 3.0 * c * eps.powf(0.25), m1_halfwidth: c * (2.0 * eps).sqrt(), sum_sq: 2.0 * c * c * eps.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnapshotCheck {
    pub t: f64,
    pub proximity: ProximityReport,
}

impl SnapshotCheck {
    pub fn m1_deviation(&self) -> f64 {
        (self.proximity.m1 - self.proximity.c / 6.0).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Verdict {
    pub c: f64,
    pub eps: f64,
    pub bounds: Theorem1Bounds,
    pub initial_distance: f64,
    pub initial_e3_gap: f64,
    pub snapshots: Vec<SnapshotCheck>,
    pub worst_distance: (f64, f64),
    pub worst_m1_deviation: (f64, f64),
    pub worst_sum_sq: (f64, f64),
}

impl Theorem1Verdict {
    pub fn distance_ok(&self) -> bool {
        self.worst_distance.1 < self.bounds.distance
    }

    pub fn m1_ok(&self) -> bool {
        self.worst_m1_deviation.1 <= self.bounds.m1_halfwidth
    }

    pub fn sum_ok(&self) -> bool {
        self.worst_sum_sq.1 < self.bounds.sum_sq
    }

    pub fn passed(&self) -> bool {
        self.distance_ok() && self.m1_ok() && self.sum_ok()
    }

    /// Key-value lines; `(t, value)` pairs are written as `value @ t`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("verdict = {}\n", if self.passed() { "pass" } else { "fail" }));
        s.push_str(&format!("c = {}\neps = {}\n", self.c, self.eps));
        s.push_str(&format!("initial_distance = {:.12e}\ninitial_e3_gap = {:.12e}\n", self.initial_distance, self.initial_e3_gap));
        s.push_str(&format!(
            "distance_bound = {:.12e}\nworst_distance = {:.12e} @ {}\ndistance_ok = {}\n",
            self.bounds.distance, self.worst_distance.1, self.worst_distance.0, self.distance_ok()
        ));
        s.push_str(&format!(
            "m1_halfwidth = {:.12e}\nworst_m1_deviation = {:.12e} @ {}\nm1_ok = {}\n",
            self.bounds.m1_halfwidth, self.worst_m1_deviation.1, self.worst_m1_deviation.0, self.m1_ok()
        ));
        s.push_str(&format!(
            "sum_bound = {:.12e}\nworst_sum_sq = {:.12e} @ {}\nsum_ok = {}\n",
            self.bounds.sum_sq, self.worst_sum_sq.1, self.worst_sum_sq.0, self.sum_ok()
        ));
        s
    }
}

fn worst(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    points.fold((0.0, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b })
}

/// Checks every kept snapshot against the three bounds after re-checking the initial data.
pub fn theorem1_verify(traj: &Trajectory, c: f64, eps: f64) -> Result<Theorem1Verdict> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let u0 = traj.snapshots.first().ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    if !momentum_is_nonnegative(u0, Calculus::Spectral, HYPOTHESIS_TOL)? {
        return Err(Error::Precondition("initial momentum density is negative".into()));
    }
    let reference = peakon_field_resolved(c, 0.0, *u0.grid());
    let initial_distance = x_distance(u0, &reference)?;
    let initial_e3_gap = (crate::functionals::e3(u0) - crate::functionals::e3(&reference)).abs();
    if !(initial_distance < c * eps && initial_e3_gap < c.powi(3) * eps) {
        return Err(Error::Precondition(format!(
            "initial data not admissible: distance {initial_distance:e}, E3 gap {initial_e3_gap:e}"
        )));
    }
    let snapshots = traj
        .states()
        .map(|(t, u)| Ok(SnapshotCheck { t, proximity: proximity_unchecked(u, c, Calculus::Spectral, Some(2.0 * eps))? }))
        .collect::<Result<Vec<_>>>()?;
    let worst_distance = worst(snapshots.iter().map(|s| (s.t, s.proximity.distance)));
    let worst_m1_deviation = worst(snapshots.iter().map(|s| (s.t, s.m1_deviation())));
    let worst_sum_sq = worst(snapshots.iter().map(|s| (s.t, s.proximity.sum_sq)));
    Ok(Theorem1Verdict {
        c,
        eps,
        bounds: Theorem1Bounds::new(c, eps),
        initial_distance,
        initial_e3_gap,
        snapshots,
        worst_distance,
        worst_m1_deviation,
        worst_sum_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::profiles::peakon_field;

    #[test]
    fn exact_and_shifted_peakons_are_at_distance_zero() {
        let g = Grid::new(40.0, 8192).unwrap();
        for x0 in [0.0, 5.0] {
            let r = peakon_proximity(&peakon_field(1.0, x0, g), 1.0, Calculus::KinkAware, None).unwrap();
            assert!(r.distance < 1e-6 && (r.xi1 - x0).abs() < 1e-6, "{r:?}");
            assert!(r.chain_holds);
        }
    }

    #[test]
    fn scaled_peakon_distance() {
        let g = Grid::new(40.0, 8192).unwrap();
        let r = peakon_proximity(&peakon_field(1.1, 0.0, g), 1.0, Calculus::KinkAware, None).unwrap();
        assert!((r.distance_sq_raw - 0.01 / 3.0).abs() < 1e-6, "{}", r.distance_sq_raw);
    }

    #[test]
    fn resolved_peakon_identity_matches_direct_distance() {
        let g = Grid::new(40.0, 4096).unwrap();
        let u = peakon_field_resolved(1.1, 16.0 * g.dx(), g);
        let r = peakon_proximity(&u, 1.0, Calculus::Spectral, Some(0.1)).unwrap();
        assert!((r.distance - r.direct_distance).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn bound_values() {
        let b = Theorem1Bounds::new(1.0, 0.01);
        assert!((b.distance - 0.948683).abs() < 1e-6);
        assert!((b.m1_halfwidth - 0.141421).abs() < 1e-6);
        assert!((b.sum_sq - 0.2).abs() < 1e-15);
        let b2 = Theorem1Bounds::new(2.0, 0.01);
        assert!((b2.distance - 2.0 * b.distance).abs() < 1e-15);
        assert!((b2.m1_halfwidth - 2.0 * b.m1_halfwidth).abs() < 1e-15);
        assert!((b2.sum_sq - 0.8).abs() < 1e-15);
    }
}
