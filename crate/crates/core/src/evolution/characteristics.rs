//! Particle paths `q_t = u(t, q)` and the transported quantity `y(t,q) q_x³`.

use super::{DpOperator, Trajectory};
use crate::error::{Error, Result};
use crate::field::{Field, Spectrum};

#[derive(Clone, Debug)]
pub struct CharacteristicState {
    pub t: f64,
    pub labels: Vec<f64>,
    pub q: Vec<f64>,
    pub qx: Vec<f64>,
    pub y0_at_labels: Vec<f64>,
    /// `y(t, q) q_x³ - y0(x)` per label.
    pub residual: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CharacteristicHistory {
    pub states: Vec<CharacteristicState>,
    /// `max |y(t,q) q_x³ - y0| / max |y0|` over labels and times.
    pub max_relative_residual: f64,
    pub min_qx: f64,
    /// `q` strictly increasing in the label at every time.
    pub monotone: bool,
}

/// Integrates `q` and `ln q_x` on the trajectory's own clock.
///
/// Midpoint states come from cubic Hermite interpolation in time using `u_t` at both ends.
pub fn characteristics_evolve(
    traj: &Trajectory,
    labels: &[f64],
    max_dt: f64,
) -> Result<CharacteristicHistory> {
    if !traj.has_all_snapshots() || traj.snapshots.is_empty() {
        return Err(Error::TooCoarse("trajectory must keep every recorded snapshot".into()));
    }
    let grid = *traj.snapshots[0].grid();
    for &x in labels {
        grid.check_inside(x)?;
    }
    if labels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("labels must strictly increase".into()));
    }
    if let Some(w) = traj.times.windows(2).find(|w| w[1] - w[0] > max_dt * (1.0 + 1e-9)) {
        return Err(Error::TooCoarse(format!(
            "snapshot spacing {} exceeds requested step {max_dt}",
            w[1] - w[0]
        )));
    }
    let mut op = DpOperator::new(grid, true);
    let y0_spec = traj.snapshots[0].momentum().spectrum();
    let y0: Vec<f64> = labels.iter().map(|&x| y0_spec.eval(x)).collect();
    let y0_scale = y0.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);

    let mut q = labels.to_vec();
    let mut s = vec![0.0; labels.len()];
    let mut states = Vec::with_capacity(traj.times.len());
    let snapshot_state = |t: f64, u: &Field, q: &[f64], s: &[f64]| {
        let ys = u.momentum().spectrum();
        let qx: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let residual =
            q.iter().zip(&qx).zip(&y0).map(|((&qi, &qxi), &y0i)| ys.eval(qi) * qxi.powi(3) - y0i).collect();
        CharacteristicState { t, labels: labels.to_vec(), q: q.to_vec(), qx, y0_at_labels: y0.clone(), residual }
    };
    states.push(snapshot_state(traj.times[0], &traj.snapshots[0], &q, &s));

    let mut r_prev = op.rhs(&traj.snapshots[0]);
    for n in 0..traj.times.len() - 1 {
        let h = traj.times[n + 1] - traj.times[n];
        let (ua, ub) = (&traj.snapshots[n], &traj.snapshots[n + 1]);
        let r_next = op.rhs(ub);
        let mid_vals: Vec<f64> = (0..grid.len())
            .map(|j| {
                0.5 * (ua.values()[j] + ub.values()[j])
                    + h / 8.0 * (r_prev.values()[j] - r_next.values()[j])
            })
            .collect();
        let mid = Field::new(grid, mid_vals)?;
        let (sa, sm, sb): (Spectrum, Spectrum, Spectrum) = (ua.spectrum(), mid.spectrum(), ub.spectrum());
        for i in 0..q.len() {
            let (q0, s0) = (q[i], s[i]);
            let k1 = sa.eval_with_derivative(q0);
            let k2 = sm.eval_with_derivative(q0 + 0.5 * h * k1.0);
            let k3 = sm.eval_with_derivative(q0 + 0.5 * h * k2.0);
            let k4 = sb.eval_with_derivative(q0 + h * k3.0);
            q[i] = q0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            s[i] = s0 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        states.push(snapshot_state(traj.times[n + 1], ub, &q, &s));
        r_prev = r_next;
    }

    let max_relative_residual = states
        .iter()
        .flat_map(|st| st.residual.iter())
        .fold(0.0f64, |m, r| m.max(r.abs()))
        / y0_scale;
    let min_qx = states.iter().flat_map(|st| st.qx.iter()).fold(f64::INFINITY, |m, &v| m.min(v));
    let monotone = states.iter().all(|st| st.q.windows(2).all(|w| w[1] > w[0]));
    Ok(CharacteristicHistory { states, max_relative_residual, min_qx, monotone })
}
