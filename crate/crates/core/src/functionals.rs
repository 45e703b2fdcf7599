//! Conserved quantities of the DP and CH equations and the X-norm.

use crate::error::Result;
use crate::field::{forward, mode_index, Field, Pieces};
use serde::{Deserialize, Serialize};

/// How derivatives, inverses and integrals of a sampled profile are formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calculus {
    /// Fourier collocation; exact on band-limited data.
    #[default]
    Spectral,
    /// One-sided stencils between derivative jumps at the local extrema of `u`
    /// and kernel recurrences for inverses; for point-sampled peaked data.
    KinkAware,
}

/// One row of the invariant log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub t: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "E3")]
    pub e3: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    #[serde(rename = "F3")]
    pub f3: f64,
    pub min_slope: f64,
    pub max_abs: f64,
}

impl InvariantRecord {
    /// `‖u‖_X^2`, the same number as `e2`.
    pub fn x_norm_sq(&self) -> f64 {
        self.e2
    }
}

/// Nodes where `u` has a strict discrete local extremum above a relative noise floor.
pub fn kink_nodes(u: &Field) -> Vec<usize> {
    let v = u.values();
    let floor = 1e-10 * u.max_abs();
    let n = v.len();
    (1..n - 1)
        .filter(|&j| {
            let (a, b) = (v[j] - v[j - 1], v[j + 1] - v[j]);
            v[j].abs() > floor && ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0))
        })
        .collect()
}

/// `u`, `u_x`, `v = (4 - d^2)^{-1} u`, `v_x` in piecewise form.
#[derive(Clone, Debug)]
pub struct Profile {
    pub calculus: Calculus,
    pub u: Pieces,
    pub ux: Pieces,
    pub v: Pieces,
    pub vx: Pieces,
}

impl Profile {
    pub fn new(u: &Field, calculus: Calculus) -> Result<Self> {
        match calculus {
            Calculus::Spectral => {
                let v = u.helmholtz_inverse(2.0)?;
                Ok(Self {
                    calculus,
                    u: Pieces::whole(u),
                    ux: Pieces::whole(&u.derivative()),
                    vx: Pieces::whole(&v.derivative()),
                    v: Pieces::whole(&v),
                })
            }
            Calculus::KinkAware => {
                let pu = Pieces::split(u, &kink_nodes(u));
                let ux = pu.derivative();
                let (v, vx) = pu.helmholtz_inverse(2.0)?;
                Ok(Self { calculus, u: pu, ux, v, vx })
            }
        }
    }

    /// Integral of a pointwise combination of `(u, u_x, v, v_x)`.
    pub fn integral(&self, f: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
        let combo = |k: usize, i: usize| {
            f(
                self.u.pieces()[k].at(i),
                self.ux.pieces()[k].at(i),
                self.v.pieces()[k].at(i),
                self.vx.pieces()[k].at(i),
            )
        };
        match self.calculus {
            Calculus::Spectral => {
                let p = &self.u.pieces()[0];
                let dx = self.u.grid().dx();
                dx * (p.lo..=p.hi).map(|i| combo(0, i)).sum::<f64>()
            }
            Calculus::KinkAware => {
                let g = *self.u.grid();
                let n = g.len();
                let lo = g.x(0);
                let hi = g.x(n - 1);
                let wrap = 0.5 * g.dx() * (combo(0, 0) + combo(self.u.pieces().len() - 1, n - 1));
                self.u.integrate_between_with(lo, hi, &combo) + wrap
            }
        }
    }

    pub fn e1(&self) -> f64 {
        self.integral(|u, _, _, _| u)
    }

    /// `∫ y v = ∫ u (u - 3 v)` using `v_xx = 4 v - u`.
    pub fn e2(&self) -> f64 {
        self.integral(|u, _, v, _| u * (u - 3.0 * v))
    }

    pub fn e3(&self) -> f64 {
        self.integral(|u, _, _, _| u * u * u)
    }

    pub fn f2(&self) -> f64 {
        self.integral(|u, ux, _, _| u * u + ux * ux)
    }

    pub fn f3(&self) -> f64 {
        self.integral(|u, ux, _, _| u * u * u + u * ux * ux)
    }

    pub fn min_slope(&self) -> f64 {
        self.ux.min_with_node().0
    }
}

/// `E1, E2, E3, F2, F3`, the minimal slope and the sup norm at time `t`.
pub fn invariant_suite(u: &Field, t: f64) -> InvariantRecord {
    let y = u.momentum();
    let v = u.helmholtz_inverse(2.0).expect("m = 2 is valid");
    let ux = u.derivative();
    let dx = u.grid().dx();
    let (mut e1, mut e2, mut e3, mut f2, mut f3) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..u.len() {
        let (uj, dj) = (u.values()[j], ux.values()[j]);
        e1 += y.values()[j];
        e2 += y.values()[j] * v.values()[j];
        e3 += uj * uj * uj;
        f2 += uj * uj + dj * dj;
        f3 += uj * uj * uj + uj * dj * dj;
    }
    InvariantRecord {
        t,
        e1: e1 * dx,
        e2: e2 * dx,
        e3: e3 * dx,
        f2: f2 * dx,
        f3: f3 * dx,
        min_slope: ux.min(),
        max_abs: u.max_abs(),
    }
}

/// Invariant suite under a chosen calculus.
pub fn invariant_suite_with(u: &Field, t: f64, calculus: Calculus) -> Result<InvariantRecord> {
    if calculus == Calculus::Spectral {
        return Ok(invariant_suite(u, t));
    }
    let p = Profile::new(u, calculus)?;
    Ok(InvariantRecord {
        t,
        e1: p.e1(),
        e2: p.e2(),
        e3: p.e3(),
        f2: p.f2(),
        f3: p.f3(),
        min_slope: p.min_slope(),
        max_abs: u.max_abs(),
    })
}

/// `E2 = ∫ y v` in physical space.
pub fn e2(u: &Field) -> f64 {
    let y = u.momentum();
    let v = u.helmholtz_inverse(2.0).expect("m = 2 is valid");
    y.mul(&v).expect("same grid").integrate()
}

pub fn e3(u: &Field) -> f64 {
    u.map(|x| x * x * x).integrate()
}

/// `E2` from the Fourier multiplier `(1 + k^2)/(4 + k^2)`.
pub fn e2_spectral(u: &Field) -> f64 {
    let n = u.len();
    let hat = forward(u.values());
    let g = u.grid();
    let s: f64 = hat
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let k = g.wavenumber(mode_index(j, n));
            (1.0 + k * k) / (4.0 + k * k) * c.norm_sqr()
        })
        .sum();
    s * g.period() / (n as f64 * n as f64)
}

/// `sqrt(E2(u - w))`.
pub fn x_distance(u: &Field, w: &Field) -> Result<f64> {
    Ok(e2(&u.sub(w)?).max(0.0).sqrt())
}

/// `(∫ u^2 + u_x^2)^{1/2}`.
pub fn h1_norm(u: &Field) -> f64 {
    let ux = u.derivative();
    (u.grid().dx() * u.values().iter().zip(ux.values()).map(|(a, b)| a * a + b * b).sum::<f64>()).sqrt()
}
