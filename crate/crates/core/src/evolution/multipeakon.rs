//! Particle dynamics of `u = Σ p_i e^{-|x - q_i|}`.

use crate::error::{Error, Result};
use crate::profiles::{Particle, PeakonState};
use serde::Serialize;

/// Positions closer than this count as a collision.
pub const COLLISION_GAP: f64 = 1e-6;

const MAX_STEP: f64 = 2e-3;
const SAFETY: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MultipeakonOutcome {
    Completed,
    CollisionDetected { t: f64, left: usize, position: f64 },
}

#[derive(Clone, Debug)]
pub struct MultipeakonHistory {
    pub times: Vec<f64>,
    pub states: Vec<PeakonState>,
    pub outcome: MultipeakonOutcome,
}

impl MultipeakonHistory {
    pub fn final_state(&self) -> &PeakonState {
        self.states.last().expect("history has an initial state")
    }

    pub fn collided(&self) -> bool {
        matches!(self.outcome, MultipeakonOutcome::CollisionDetected { .. })
    }

    /// State at `t`, integrated forward from the last recorded time not after `t`.
    pub fn state_at(&self, t: f64) -> Result<PeakonState> {
        let last = *self.times.last().expect("nonempty");
        if !(t >= self.times[0] && t <= last) {
            return Err(Error::InvalidParameter(format!("time {t} outside [{}, {last}]", self.times[0])));
        }
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        let mut s = self.states[i].clone();
        let mut tau = self.times[i];
        while t - tau > 0.0 {
            let h = step_bound(&s).min(t - tau);
            s = rk4_step(&s, h);
            tau += h;
        }
        Ok(s)
    }
}

/// `q_i' = Σ_j p_j e^{-|q_i-q_j|}`, `p_i' = 2 p_i Σ_{j≠i} p_j sgn(q_i-q_j) e^{-|q_i-q_j|}`.
///
/// The slope at a peak is the average of the one-sided limits.
pub fn multipeakon_rhs(state: &PeakonState) -> (Vec<f64>, Vec<f64>) {
    let pts = &state.particles;
    let mut dq = vec![0.0; pts.len()];
    let mut dp = vec![0.0; pts.len()];
    for (i, a) in pts.iter().enumerate() {
        let mut vel = 0.0;
        let mut slope = 0.0;
        for (j, b) in pts.iter().enumerate() {
            let e = (-(a.q - b.q).abs()).exp();
            vel += b.p * e;
            if j != i {
                slope += b.p * (a.q - b.q).signum() * e;
            }
        }
        dq[i] = vel;
        dp[i] = 2.0 * a.p * slope;
    }
    (dq, dp)
}

fn shifted(s: &PeakonState, h: f64, k: &(Vec<f64>, Vec<f64>)) -> PeakonState {
    PeakonState {
        particles: s
            .particles
            .iter()
            .enumerate()
            .map(|(i, pt)| Particle { p: pt.p + h * k.1[i], q: pt.q + h * k.0[i] })
            .collect(),
    }
}

fn rk4_step(s: &PeakonState, h: f64) -> PeakonState {
    let k1 = multipeakon_rhs(s);
    let k2 = multipeakon_rhs(&shifted(s, 0.5 * h, &k1));
    let k3 = multipeakon_rhs(&shifted(s, 0.5 * h, &k2));
    let k4 = multipeakon_rhs(&shifted(s, h, &k3));
    let n = s.len();
    let mut out = s.clone();
    for i in 0..n {
        out.particles[i].q += h / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
        out.particles[i].p += h / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
    }
    out
}

/// Step cap from the closing speed of neighbours and the amplitude growth rate.
fn step_bound(s: &PeakonState) -> f64 {
    let (dq, dp) = multipeakon_rhs(s);
    let mut h = MAX_STEP;
    for i in 1..s.len() {
        let gap = s.particles[i].q - s.particles[i - 1].q;
        let closing = dq[i - 1] - dq[i];
        if closing > 0.0 {
            h = h.min(SAFETY * gap / closing);
        }
    }
    for (pt, &rate) in s.particles.iter().zip(&dp) {
        if rate != 0.0 {
            h = h.min(SAFETY * (pt.p / rate).abs());
        }
    }
    h
}

fn closest_pair(s: &PeakonState) -> Option<(usize, f64)> {
    (1..s.len())
        .map(|i| (i - 1, s.particles[i].q - s.particles[i - 1].q))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Adaptive RK4 to `t_end`; stops at the first collision and never continues past it.
pub fn multipeakon_evolve(state0: &PeakonState, t_end: f64) -> Result<MultipeakonHistory> {
    state0.validate()?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be nonnegative, got {t_end}")));
    }
    if let Some((_, gap)) = closest_pair(state0) {
        if gap < COLLISION_GAP {
            return Err(Error::InitialCollision(gap));
        }
    }
    let mut times = vec![0.0];
    let mut states = vec![state0.clone()];
    let mut s = state0.clone();
    let mut t = 0.0;
    while t < t_end {
        let h = step_bound(&s).min(t_end - t);
        let next = rk4_step(&s, h);
        if next.particles.iter().any(|pt| !(pt.p.is_finite() && pt.q.is_finite())) {
            return Err(Error::Numeric(format!("non-finite peakon state at t = {}", t + h)));
        }
        t += h;
        s = next;
        times.push(t);
        states.push(s.clone());
        if let Some((i, gap)) = closest_pair(&s) {
            if gap < COLLISION_GAP || s.particles[i + 1].q < s.particles[i].q {
                let position = 0.5 * (s.particles[i].q + s.particles[i + 1].q);
                return Ok(MultipeakonHistory {
                    times,
                    states,
                    outcome: MultipeakonOutcome::CollisionDetected { t, left: i, position },
                });
            }
        }
    }
    Ok(MultipeakonHistory { times, states, outcome: MultipeakonOutcome::Completed })
}
