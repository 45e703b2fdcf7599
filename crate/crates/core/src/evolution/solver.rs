//! Pseudospectral RK4 integrator for `u_t + ∂x(u²/2 + p∗(3u²/2)) = 0`.

use super::{SolverConfig, Termination, TimeStep, Trajectory};
use crate::error::{Error, Result};
use crate::field::{mode_index, plan_forward, plan_inverse, Field, Grid};
use crate::functionals::invariant_suite;
use rustfft::num_complex::Complex64;
use rustfft::Fft;
use std::sync::Arc;

/// Reusable buffers and plans for repeated right-hand-side evaluations on one grid.
pub struct DpOperator {
    grid: Grid,
    dealias: bool,
    n: usize,
    big: usize,
    fwd_n: Arc<dyn Fft<f64>>,
    inv_n: Arc<dyn Fft<f64>>,
    fwd_big: Arc<dyn Fft<f64>>,
    inv_big: Arc<dyn Fft<f64>>,
    ik: Vec<f64>,
    flux_mult: Vec<f64>,
    pad: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl DpOperator {
    pub fn new(grid: Grid, dealias: bool) -> Self {
        let n = grid.len();
        let big = if dealias { 3 * n / 2 } else { n };
        let mut ik = vec![0.0; n];
        let mut flux_mult = vec![0.0; n];
        for j in 0..n {
            let k = grid.wavenumber(mode_index(j, n));
            ik[j] = if j == n / 2 { 0.0 } else { k };
            flux_mult[j] = 0.5 + 1.5 / (1.0 + k * k);
        }
        Self {
            grid,
            dealias,
            n,
            big,
            fwd_n: plan_forward(n),
            inv_n: plan_inverse(n),
            fwd_big: plan_forward(big),
            inv_big: plan_inverse(big),
            ik,
            flux_mult,
            pad: vec![Complex64::new(0.0, 0.0); big],
            scratch: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn slot(&self, j: usize) -> usize {
        let m = mode_index(j, self.n);
        if m >= 0 {
            m as usize
        } else {
            (self.big as i64 + m) as usize
        }
    }

    /// Writes the DFT of `u_t` into `out` given the DFT of `u` (Nyquist of `hat` ignored).
    pub fn rhs_hat(&mut self, hat: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        self.pad.iter_mut().for_each(|c| *c = zero);
        for j in 0..n {
            if j != n / 2 {
                let s = self.slot(j);
                self.pad[s] = hat[j];
            }
        }
        self.inv_big.process(&mut self.pad);
        let inv_n = 1.0 / n as f64;
        for c in self.pad.iter_mut() {
            let v = c.re * inv_n;
            *c = Complex64::new(v * v, 0.0);
        }
        self.fwd_big.process(&mut self.pad);
        let rescale = n as f64 / self.big as f64;
        for j in 0..n {
            let sq = if j == n / 2 { zero } else { self.pad[self.slot(j)] * rescale };
            // u_t = -∂x F,  F̂ = (1/2 + (3/2)/(1+k²)) û²
            out[j] = -Complex64::new(0.0, self.ik[j]) * sq * self.flux_mult[j];
        }
    }

    pub fn forward(&mut self, values: &[f64], out: &mut [Complex64]) {
        for (o, &v) in out.iter_mut().zip(values) {
            *o = Complex64::new(v, 0.0);
        }
        self.fwd_n.process(out);
    }

    pub fn inverse(&mut self, hat: &[Complex64], out: &mut [f64]) {
        self.scratch.copy_from_slice(hat);
        self.inv_n.process(&mut self.scratch);
        let s = 1.0 / self.n as f64;
        for (o, c) in out.iter_mut().zip(&self.scratch) {
            *o = c.re * s;
        }
    }

    /// Physical derivative of the field whose DFT is `hat`.
    pub fn derivative(&mut self, hat: &[Complex64], out: &mut [f64]) {
        for (j, c) in self.scratch.iter_mut().enumerate() {
            *c = Complex64::new(0.0, self.ik[j]) * hat[j];
        }
        self.inv_n.process(&mut self.scratch);
        let s = 1.0 / self.n as f64;
        for (o, c) in out.iter_mut().zip(&self.scratch) {
            *o = c.re * s;
        }
    }

    /// Physical-space `u_t` for a field.
    pub fn rhs(&mut self, u: &Field) -> Field {
        let mut hat = vec![Complex64::new(0.0, 0.0); self.n];
        self.forward(u.values(), &mut hat);
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        if self.dealias {
            self.rhs_hat(&hat, &mut out);
        } else {
            self.rhs_hat_aliased(&hat, &mut out);
        }
        let mut vals = vec![0.0; self.n];
        self.inverse(&out, &mut vals);
        Field::from_raw(self.grid, vals)
    }

    fn rhs_hat_aliased(&mut self, hat: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let mut phys = vec![0.0; n];
        let mut h = hat.to_vec();
        h[n / 2] = Complex64::new(0.0, 0.0);
        self.inverse(&h, &mut phys);
        let sq: Vec<f64> = phys.iter().map(|v| v * v).collect();
        self.forward(&sq, out);
        for j in 0..n {
            out[j] = -Complex64::new(0.0, self.ik[j]) * out[j] * self.flux_mult[j];
        }
    }

    fn eval(&mut self, hat: &[Complex64], out: &mut [Complex64]) {
        if self.dealias {
            self.rhs_hat(hat, out);
        } else {
            self.rhs_hat_aliased(hat, out);
        }
    }
}

/// `u_t = -u u_x - ∂x p∗(3u²/2)`, products dealiased by 3/2 zero padding.
pub fn dp_rhs(u: &Field) -> Field {
    DpOperator::new(*u.grid(), true).rhs(u)
}

fn axpy(out: &mut [Complex64], base: &[Complex64], a: f64, k: &[Complex64]) {
    for ((o, b), kk) in out.iter_mut().zip(base).zip(k) {
        *o = b + kk * a;
    }
}

/// Classic RK4 from `u0` to `config.t_end`.
pub fn evolve(u0: &Field, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = *u0.grid();
    let n = grid.len();
    let dx = grid.dx();
    let mut op = DpOperator::new(grid, config.dealias);
    let zero = Complex64::new(0.0, 0.0);
    let mut hat = vec![zero; n];
    op.forward(u0.values(), &mut hat);
    hat[n / 2] = zero;
    let mut phys = vec![0.0; n];
    op.inverse(&hat, &mut phys);

    // The recorded initial state is the caller's data; the integrated state drops its Nyquist mode.
    let mut traj = Trajectory::new();
    traj.push(0.0, u0.clone(), invariant_suite(u0, 0.0), config.keep_snapshots);

    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut slope = vec![0.0; n];
    let mut t = 0.0;
    let mut step = 0usize;
    let mut min_slope_history = Vec::new();
    while t < config.t_end * (1.0 - 1e-14) {
        let umax = phys.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut dt = match config.dt {
            TimeStep::Auto => config.cfl * dx / umax.max(1.0),
            TimeStep::Fixed(h) => h,
        };
        if t + dt > config.t_end || (config.t_end - (t + dt)) < 1e-9 * dt {
            dt = config.t_end - t;
        }
        op.eval(&hat, &mut k1);
        axpy(&mut tmp, &hat, 0.5 * dt, &k1);
        op.eval(&tmp, &mut k2);
        axpy(&mut tmp, &hat, 0.5 * dt, &k2);
        op.eval(&tmp, &mut k3);
        axpy(&mut tmp, &hat, dt, &k3);
        op.eval(&tmp, &mut k4);
        for j in 0..n {
            hat[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        t += dt;
        step += 1;
        op.inverse(&hat, &mut phys);
        if phys.iter().any(|v| !v.is_finite()) {
            traj.termination = Termination::Error {
                t,
                message: format!("non-finite state at step {step}"),
            };
            traj.steps = step;
            return Ok(traj);
        }
        op.derivative(&hat, &mut slope);
        let min_slope = slope.iter().copied().fold(f64::INFINITY, f64::min);
        min_slope_history.push((t, min_slope));
        let finished = t >= config.t_end * (1.0 - 1e-14);
        let blowup = min_slope < config.blowup_slope_threshold;
        if step % config.record_every == 0 || finished || blowup {
            let u = Field::from_raw(grid, phys.clone());
            let rec = invariant_suite(&u, t);
            traj.push(t, u, rec, config.keep_snapshots);
        }
        if blowup {
            traj.termination = Termination::BlowupDetected { t, min_slope };
            break;
        }
    }
    traj.steps = step;
    traj.step_slopes = min_slope_history;
    Ok(traj)
}

/// Fails when a state is not finite; used by callers that need a hard error instead of a flag.
pub fn require_completed(traj: &Trajectory) -> Result<()> {
    match &traj.termination {
        Termination::Error { message, .. } => Err(Error::Numeric(message.clone())),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::peakon_field_resolved;
    use std::f64::consts::PI;

    #[test]
    fn rhs_of_constant_vanishes() {
        let g = Grid::new(40.0, 256).unwrap();
        assert!(dp_rhs(&Field::constant(g, 1.7)).max_abs() < 1e-12);
    }

    #[test]
    fn rhs_of_sine_matches_closed_form_convolution() {
        let g = Grid::new(10.0, 256).unwrap();
        let kappa = PI / g.half_length();
        let u = Field::from_fn(g, |x| (kappa * x).sin());
        let r = dp_rhs(&u);
        // 3/2 sin² = 3/4 (1 - cos 2κx) and p∗cos(ax) = cos(ax)/(1 + a²).
        let a = 2.0 * kappa;
        for j in 0..g.len() {
            let x = g.x(j);
            let uux = (kappa * x).sin() * kappa * (kappa * x).cos();
            let dconv = 0.75 * a * (a * x).sin() / (1.0 + a * a);
            assert!((r.values()[j] + uux + dconv).abs() < 1e-8);
        }
    }

    #[test]
    fn evolve_translates_resolved_peakon_short_time() {
        let g = Grid::new(40.0, 1024).unwrap();
        let u0 = peakon_field_resolved(1.0, 0.0, g);
        let cfg = SolverConfig { t_end: 1.0, record_every: 1000, ..SolverConfig::default() };
        let tr = evolve(&u0, &cfg).unwrap();
        assert!(matches!(tr.termination, Termination::Completed));
        let exact = peakon_field_resolved(1.0, 1.0, g);
        let err = tr.final_field().sub(&exact).unwrap().norm_l2() / u0.norm_l2();
        assert!(err < 5e-3, "{err}");
        let e0 = tr.records[0].e2;
        assert!((tr.records.last().unwrap().e2 - e0).abs() / e0 < 1e-6);
    }

    #[test]
    fn resolved_peakon_traveling_wave_relation() {
        // Point samples leave an O(1/(N|x|)) Gibbs tail; the band-limited peakon does not.
        let g = Grid::new(40.0, 8192).unwrap();
        let u = peakon_field_resolved(1.0, 0.0, g);
        let r = dp_rhs(&u);
        let ux = u.derivative();
        let worst = (0..g.len())
            .filter(|&j| g.x(j).abs() > 0.5)
            .map(|j| (r.values()[j] + ux.values()[j]).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
    }
}
