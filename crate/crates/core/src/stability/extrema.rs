//! Local extrema of `v_u` and the alternating aggregates built from them.

use crate::error::{Error, Result};
use crate::field::{Field, Pieces};
use serde::Serialize;

/// Relative amplitude floor applied when the caller passes none.
pub const DEFAULT_AMP_FLOOR: f64 = 1e-10;

/// Slack on `v ≥ 0`, relative to `max v`.
const NONNEGATIVE_SLACK: f64 = 1e-8;

/// How a discrete critical node is moved to the critical point of an interpolant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    /// Parabola through the node and its two neighbours.
    #[default]
    Quadratic,
    /// Newton on the derivative of the local seven-point polynomial inside the piece.
    LocalPolynomial,
    /// Bisection on the derivative of the trigonometric interpolant.
    Trigonometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub node: usize,
}

/// Maxima `ξ_i` and minima `η_i` in position order, alternating `ξ_1 < η_1 < ξ_2 < ...`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremaProfile {
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
}

impl ExtremaProfile {
    pub fn n(&self) -> usize {
        self.maxima.len()
    }

    /// Largest maximum.
    pub fn top(&self) -> Extremum {
        *self
            .maxima
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .expect("profile has a maximum")
    }

    pub fn max_values(&self) -> Vec<f64> {
        self.maxima.iter().map(|e| e.value).collect()
    }

    pub fn min_values(&self) -> Vec<f64> {
        self.minima.iter().map(|e| e.value).collect()
    }
}

/// Quadratic refinement on samples of a [`Field`].
pub fn extrema_scan(v: &Field, amp_floor: Option<f64>) -> Result<ExtremaProfile> {
    extrema_scan_with(&Pieces::whole(v), amp_floor, Refinement::Quadratic)
}

/// Scans nodal values for sign changes of the forward difference, removes adjacent pairs whose
/// amplitude gap is below the floor, drops minima outside the outermost maxima and refines.
pub fn extrema_scan_with(
    v: &Pieces,
    amp_floor: Option<f64>,
    refinement: Refinement,
) -> Result<ExtremaProfile> {
    extrema_scan_slack(v, amp_floor, refinement, NONNEGATIVE_SLACK)
}

/// [`extrema_scan_with`] with the slack on `v ≥ 0` (relative to `max v`) chosen by the caller.
pub fn extrema_scan_slack(
    v: &Pieces,
    amp_floor: Option<f64>,
    refinement: Refinement,
    negative_slack: f64,
) -> Result<ExtremaProfile> {
    let field = v.to_field();
    let vals = field.values();
    let grid = *field.grid();
    let vmax = field.max();
    let floor = amp_floor.unwrap_or(DEFAULT_AMP_FLOOR * vmax.max(0.0));
    if !(vmax > floor) {
        return Err(Error::NoExtrema(floor));
    }
    let vmin = field.min();
    if vmin < -negative_slack * vmax {
        return Err(Error::Precondition(format!("v takes the negative value {vmin:e}")));
    }

    let mut raw: Vec<(usize, bool)> = Vec::new();
    let mut last = 0i8;
    let mut plateau = 0usize;
    for j in 0..vals.len() - 1 {
        let d = vals[j + 1] - vals[j];
        let s = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            continue;
        };
        if last != 0 && s != last {
            raw.push(((plateau + j) / 2, last > 0));
        }
        last = s;
        plateau = j + 1;
    }

    let mut kept: Vec<(usize, bool)> = Vec::with_capacity(raw.len());
    for cand in raw {
        match kept.last() {
            Some(top) if (vals[top.0] - vals[cand.0]).abs() < floor => {
                kept.pop();
            }
            _ => kept.push(cand),
        }
    }
    while kept.first().is_some_and(|e| !e.1) {
        kept.remove(0);
    }
    while kept.last().is_some_and(|e| !e.1) {
        kept.pop();
    }
    if kept.is_empty() {
        return Err(Error::NoExtrema(floor));
    }

    let spectrum = (refinement == Refinement::Trigonometric).then(|| field.spectrum());
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for (node, is_max) in kept {
        let (mut x, mut value) = match refinement {
            Refinement::Quadratic => quadratic(vals, node, grid.x(node), grid.dx()),
            Refinement::LocalPolynomial => newton_local(v, vals, node, grid.x(0), grid.dx()),
            Refinement::Trigonometric => {
                bisect_trig(spectrum.as_ref().expect("built above"), vals, node, grid.x(node), grid.dx())
            }
        };
        // A refined maximum may not sit below its node, nor a minimum above it.
        let wrong_way = |val: f64| if is_max { val < vals[node] } else { val > vals[node] };
        if wrong_way(value) {
            (x, value) = quadratic(vals, node, grid.x(node), grid.dx());
            if wrong_way(value) {
                (x, value) = (grid.x(node), vals[node]);
            }
        }
        let e = Extremum { x, value, node };
        if is_max {
            maxima.push(e);
        } else {
            minima.push(e);
        }
    }
    Ok(ExtremaProfile { maxima, minima })
}

fn quadratic(vals: &[f64], j: usize, xj: f64, dx: f64) -> (f64, f64) {
    if j == 0 || j + 1 >= vals.len() {
        return (xj, vals[j]);
    }
    let (a, b, c) = (vals[j - 1], vals[j], vals[j + 1]);
    let curv = a - 2.0 * b + c;
    if curv == 0.0 {
        return (xj, b);
    }
    let delta = (0.5 * (a - c) / curv).clamp(-1.0, 1.0);
    (xj + delta * dx, b - 0.25 * (a - c) * delta)
}

fn newton_local(v: &Pieces, vals: &[f64], j: usize, x0: f64, dx: f64) -> (f64, f64) {
    let (xq, vq) = quadratic(vals, j, x0 + j as f64 * dx, dx);
    let mut s = (xq - x0) / dx;
    let (lo, hi) = (j as f64 - 1.0, j as f64 + 1.0);
    for _ in 0..30 {
        let k = v.piece_index_at(s);
        let (_, d1, d2) = v.local_poly(k, s);
        if d2 == 0.0 || !d2.is_finite() {
            return (xq, vq);
        }
        let step = d1 / d2;
        s = (s - step).clamp(lo, hi);
        if step.abs() < 1e-13 {
            break;
        }
    }
    let k = v.piece_index_at(s);
    let (val, d1, _) = v.local_poly(k, s);
    if !(val.is_finite() && d1.abs() < 1e-6 * vals[j].abs().max(1e-300) / dx) {
        return (xq, vq);
    }
    (x0 + s * dx, val)
}

fn bisect_trig(spec: &crate::field::Spectrum, vals: &[f64], j: usize, xj: f64, dx: f64) -> (f64, f64) {
    let (mut a, mut b) = (xj - dx, xj + dx);
    let (mut da, db) = (spec.eval_derivative(a), spec.eval_derivative(b));
    if !(da * db < 0.0) {
        return quadratic(vals, j, xj, dx);
    }
    for _ in 0..48 {
        let m = 0.5 * (a + b);
        let dm = spec.eval_derivative(m);
        if dm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if (dm > 0.0) == (da > 0.0) {
            a = m;
            da = dm;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a + b);
    (x, spec.eval(x))
}

/// `A_n`, `B_n` and the partial sums they are built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Aggregates {
    pub m1: f64,
    pub an: f64,
    pub bn: f64,
    /// `Σ_{i≥2} (M_i² - m_{i-1}²)`.
    pub sum_sq: f64,
    /// `Σ_{i≥2} (M_i³ - m_{i-1}³)`.
    pub sum_cube: f64,
}

/// Sorts both lists descending and pairs `M_i` with `m_{i-1}`.
pub fn aggregates(maxima: &[f64], minima: &[f64]) -> Result<Aggregates> {
    if maxima.is_empty() {
        return Err(Error::Ordering("no maxima".into()));
    }
    if minima.len() + 1 != maxima.len() {
        return Err(Error::Ordering(format!(
            "{} maxima need {} minima, got {}",
            maxima.len(),
            maxima.len() - 1,
            minima.len()
        )));
    }
    let mut big = maxima.to_vec();
    let mut small = minima.to_vec();
    big.sort_by(|a, b| b.total_cmp(a));
    small.sort_by(|a, b| b.total_cmp(a));
    let tol = 1e-12 * big[0].abs();
    let mut sum_sq = 0.0;
    let mut sum_cube = 0.0;
    for i in 1..big.len() {
        let (mi, lo) = (big[i], small[i - 1]);
        if mi < lo - tol {
            return Err(Error::Pairing { index: i + 1, max: mi, min: lo });
        }
        sum_sq += mi * mi - lo * lo;
        sum_cube += mi.powi(3) - lo.powi(3);
    }
    let m1 = big[0];
    Ok(Aggregates {
        m1,
        an: (m1 * m1 + sum_sq).max(0.0).sqrt(),
        bn: (m1.powi(3) + sum_cube).cbrt(),
        sum_sq,
        sum_cube,
    })
}

pub fn an_bn(profile: &ExtremaProfile) -> Result<(f64, f64)> {
    let a = aggregates(&profile.max_values(), &profile.min_values())?;
    Ok((a.an, a.bn))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SequenceReport {
    /// `Σ(M_i³ - m_{i-1}³)`.
    pub easy_lhs: f64,
    /// `(3/2) M_1 Σ(M_i² - m_{i-1}²)`.
    pub easy_rhs: f64,
    pub an: f64,
    pub bn: f64,
}

impl SequenceReport {
    pub fn easy_margin(&self) -> f64 {
        self.easy_rhs - self.easy_lhs
    }

    pub fn ab_margin(&self) -> f64 {
        self.an - self.bn
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.easy_margin() >= -tol && self.ab_margin() >= -tol
    }
}

/// Both elementary inequalities for descending `M` and `m` with `M_i ≥ m_{i-1} ≥ 0`.
pub fn sequence_inequalities(big: &[f64], small: &[f64]) -> Result<SequenceReport> {
    if big.is_empty() || small.len() + 1 != big.len() {
        return Err(Error::Ordering(format!("need n maxima and n-1 minima, got {} and {}", big.len(), small.len())));
    }
    if big.windows(2).any(|w| w[1] > w[0]) || small.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Ordering("sequences must be descending".into()));
    }
    if big.iter().chain(small).any(|&x| !(x >= 0.0)) {
        return Err(Error::Ordering("sequences must be nonnegative".into()));
    }
    if let Some(i) = (1..big.len()).find(|&i| big[i] < small[i - 1]) {
        return Err(Error::Ordering(format!("M_{} < m_{}", i + 1, i)));
    }
    let a = aggregates(big, small)?;
    Ok(SequenceReport { easy_lhs: a.sum_cube, easy_rhs: 1.5 * a.m1 * a.sum_sq, an: a.an, bn: a.bn })
}
