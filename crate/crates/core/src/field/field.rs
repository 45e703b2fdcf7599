use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Off-grid evaluation scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Trigonometric,
    Cubic,
}

/// Real samples of a profile on a periodic [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(j));
        }
        Ok(Self { grid, values })
    }

    /// Skips the finiteness scan; callers guarantee the length.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self { grid, values: (0..grid.len()).map(|j| f(grid.x(j))).collect() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.same_grid(other)?;
        Ok(Field::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Circular shift of the samples by `k` nodes to the right.
    pub fn shifted(&self, k: isize) -> Field {
        let n = self.len() as isize;
        let values = (0..n).map(|j| self.values[(j - k).rem_euclid(n) as usize]).collect();
        Field::from_raw(self.grid, values)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = j;
            }
        }
        best
    }

    /// Periodic trapezoid rule, `dx * sum`.
    pub fn integrate(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Applies the Fourier multiplier `mult(k)` for signed modes; the Nyquist slot gets `nyquist(k)`.
    pub fn apply_multiplier(
        &self,
        mult: impl Fn(f64) -> Complex64,
        nyquist: impl Fn(f64) -> Complex64,
    ) -> Field {
        let n = self.len();
        let mut hat = fft::forward(&self.values);
        for (j, c) in hat.iter_mut().enumerate() {
            let m = fft::mode_index(j, n);
            let k = self.grid.wavenumber(m);
            *c *= if j == n / 2 { nyquist(k) } else { mult(k) };
        }
        Field::from_raw(self.grid, fft::inverse_real(hat))
    }

    /// Fourier-collocation first derivative; the Nyquist mode is dropped.
    pub fn derivative(&self) -> Field {
        self.apply_multiplier(|k| Complex64::new(0.0, k), |_| Complex64::new(0.0, 0.0))
    }

    /// Fourier-collocation second derivative, `-k^2` on every mode including Nyquist.
    pub fn second_derivative(&self) -> Field {
        self.apply_multiplier(|k| Complex64::new(-k * k, 0.0), |k| Complex64::new(-k * k, 0.0))
    }

    /// `(m^2 - d^2/dx^2)^{-1}` via the multiplier `1/(m^2 + k^2)`.
    pub fn helmholtz_inverse(&self, m: f64) -> Result<Field> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParameter(format!("Helmholtz parameter must be positive, got {m}")));
        }
        let m2 = m * m;
        let f = |k: f64| Complex64::new(1.0 / (m2 + k * k), 0.0);
        Ok(self.apply_multiplier(f, f))
    }

    /// Momentum density `y = u - u_xx`.
    pub fn momentum(&self) -> Field {
        let f = |k: f64| Complex64::new(1.0 + k * k, 0.0);
        self.apply_multiplier(f, f)
    }

    /// Square of the field with the product computed on a 3/2-padded grid and truncated back.
    pub fn dealiased_square(&self) -> Field {
        let n = self.len();
        let big = 3 * n / 2;
        let hat = fft::forward(&self.values);
        let mut pad = vec![Complex64::new(0.0, 0.0); big];
        for j in 0..n {
            let m = fft::mode_index(j, n);
            if j == n / 2 {
                continue;
            }
            let slot = if m >= 0 { m as usize } else { (big as i64 + m) as usize };
            pad[slot] = hat[j];
        }
        let phys = {
            let mut buf = pad;
            fft::plan_inverse(big).process(&mut buf);
            buf.into_iter().map(|c| (c.re / n as f64).powi(2)).collect::<Vec<f64>>()
        };
        let mut sq: Vec<Complex64> = phys.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        fft::plan_forward(big).process(&mut sq);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, o) in out.iter_mut().enumerate() {
            let m = fft::mode_index(j, n);
            if j == n / 2 {
                continue;
            }
            let slot = if m >= 0 { m as usize } else { (big as i64 + m) as usize };
            *o = sq[slot] * (n as f64 / big as f64);
        }
        Field::from_raw(self.grid, fft::inverse_real(out))
    }

    /// Trigonometric interpolant; reproduces stored values at nodes.
    pub fn evaluate_at(&self, x: f64) -> Result<f64> {
        self.evaluate_with(x, Interpolation::Trigonometric)
    }

    pub fn evaluate_with(&self, x: f64, scheme: Interpolation) -> Result<f64> {
        self.grid.check_inside(x)?;
        if let Some(v) = self.node_value(x) {
            return Ok(v);
        }
        Ok(match scheme {
            Interpolation::Trigonometric => self.spectrum().eval(x),
            Interpolation::Cubic => self.cubic_at(x),
        })
    }

    fn node_value(&self, x: f64) -> Option<f64> {
        let dx = self.grid.dx();
        let s = (x + self.grid.half_length()) / dx;
        let r = s.round();
        if (s - r).abs() <= 1e-12 {
            Some(self.values[(r as usize) % self.len()])
        } else {
            None
        }
    }

    fn cubic_at(&self, x: f64) -> f64 {
        let n = self.len() as isize;
        let s = (x + self.grid.half_length()) / self.grid.dx();
        let j = s.floor() as isize;
        let t = s - j as f64;
        let at = |i: isize| self.values[(i).rem_euclid(n) as usize];
        let (p0, p1, p2, p3) = (at(j - 1), at(j), at(j + 1), at(j + 2));
        let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
    }

    /// Fourier coefficients for repeated off-grid evaluation.
    pub fn spectrum(&self) -> Spectrum {
        Spectrum { grid: self.grid, hat: fft::forward(&self.values) }
    }
}

/// DFT coefficients of a field, evaluated as a band-limited trigonometric polynomial.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    hat: Vec<Complex64>,
}

impl Spectrum {
    /// Interpolant value at any real `x` (periodic).
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_series(x, |_| Complex64::new(1.0, 0.0), true)
    }

    /// Derivative of the interpolant; the Nyquist term is dropped as in [`Field::derivative`].
    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.eval_series(x, |k| Complex64::new(0.0, k), false)
    }

    /// Value and derivative in one pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let n = self.hat.len();
        let l = self.grid.half_length();
        let theta = std::f64::consts::PI * (x + l) / l;
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut val = self.hat[0].re;
        let mut der = 0.0;
        for m in 1..n / 2 {
            rot = if m % 64 == 0 { Complex64::from_polar(1.0, theta * m as f64) } else { rot * step };
            let k = self.grid.wavenumber(m as i64);
            let z = self.hat[m] * rot;
            val += 2.0 * z.re;
            der -= 2.0 * k * z.im;
        }
        let m = (n / 2) as i64;
        val += self.hat[n / 2].re * (theta * m as f64).cos();
        (val / n as f64, der / n as f64)
    }

    /// Value of the interpolant after applying a real-symmetric multiplier.
    pub fn eval_filtered(&self, x: f64, mult: impl Fn(f64) -> Complex64, keep_nyquist: bool) -> f64 {
        self.eval_series(x, mult, keep_nyquist)
    }

    fn eval_series(&self, x: f64, mult: impl Fn(f64) -> Complex64, keep_nyquist: bool) -> f64 {
        let n = self.hat.len();
        let theta = std::f64::consts::PI * (x + self.grid.half_length()) / self.grid.half_length();
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut acc = (self.hat[0] * mult(0.0)).re;
        for m in 1..n / 2 {
            // Re-anchor periodically to bound drift in the rotating phase.
            rot = if m % 64 == 0 { Complex64::from_polar(1.0, theta * m as f64) } else { rot * step };
            let k = self.grid.wavenumber(m as i64);
            acc += 2.0 * (self.hat[m] * mult(k) * rot).re;
        }
        if keep_nyquist {
            let m = (n / 2) as i64;
            let k = self.grid.wavenumber(m);
            acc += (self.hat[n / 2] * mult(k)).re * (theta * m as f64).cos();
        }
        acc / n as f64
    }
}
