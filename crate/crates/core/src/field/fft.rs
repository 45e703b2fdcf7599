//! Thin wrappers over `rustfft` with a per-thread plan cache.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan_forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn plan_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Unnormalized forward DFT of real samples.
pub(crate) fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse DFT scaled by 1/n, keeping the real part.
pub(crate) fn inverse_real(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    plan_inverse(n).process(&mut coeffs);
    let scale = 1.0 / n as f64;
    coeffs.into_iter().map(|c| c.re * scale).collect()
}

/// Signed mode index for DFT slot `j` of an `n`-point transform; the Nyquist slot maps to `n/2`.
#[inline]
pub(crate) fn mode_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
