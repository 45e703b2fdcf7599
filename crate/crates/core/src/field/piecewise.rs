//! Calculus on samples that are smooth between break nodes but may have
//! derivative jumps at them (point-sampled peakons, multipeakons).
//!
//! Stencils never straddle a break. Each piece stores its own endpoint
//! values, so a break node carries a left and a right value.

use super::field::Field;
use super::grid::Grid;
use crate::error::{Error, Result};

const QUAD_ORDER: usize = 6;
const DIFF_POINTS: usize = 7;
const GL_NODES: [f64; 6] = [
    -0.932_469_514_203_152_0,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152_0,
];
const GL_WEIGHTS: [f64; 6] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_0,
    0.467_913_934_572_691_0,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

/// Finite-difference weights for the `order`-th derivative at `x0` (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Lagrange basis values at `s` for integer nodes `start..start+q`.
fn lagrange_basis(start: usize, q: usize, s: f64, out: &mut [f64]) {
    for k in 0..q {
        let xk = (start + k) as f64;
        let mut l = 1.0;
        for j in 0..q {
            if j != k {
                let xj = (start + j) as f64;
                l *= (s - xj) / (xk - xj);
            }
        }
        out[k] = l;
    }
}

/// A maximal run of nodes `lo..=hi` on which the sampled function is smooth.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub lo: usize,
    pub hi: usize,
    pub values: Vec<f64>,
}

impl Piece {
    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        self.values[i - self.lo]
    }

    pub fn node_count(&self) -> usize {
        self.hi - self.lo + 1
    }

    fn stencil_start(&self, q: usize, anchor: f64) -> usize {
        let want = anchor.floor() as i64 - (q as i64 / 2 - 1);
        want.clamp(self.lo as i64, (self.hi + 1 - q) as i64) as usize
    }
}

/// Piecewise-smooth samples on the non-periodic node range `0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pieces {
    grid: Grid,
    pieces: Vec<Piece>,
}

impl Pieces {
    /// One piece covering every node.
    pub fn whole(f: &Field) -> Self {
        Self::split(f, &[])
    }

    /// Splits at the given interior node indices.
    pub fn split(f: &Field, breaks: &[usize]) -> Self {
        let n = f.len();
        let mut cuts: Vec<usize> = breaks.iter().copied().filter(|&b| b > 0 && b < n - 1).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut pieces = Vec::with_capacity(cuts.len() + 1);
        let mut lo = 0;
        for &b in cuts.iter().chain(std::iter::once(&(n - 1))) {
            pieces.push(Piece { lo, hi: b, values: f.values()[lo..=b].to_vec() });
            lo = b;
        }
        Self { grid: *f.grid(), pieces }
    }

    fn from_pieces(grid: Grid, pieces: Vec<Piece>) -> Self {
        Self { grid, pieces }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn breaks(&self) -> Vec<usize> {
        self.pieces.iter().skip(1).map(|p| p.lo).collect()
    }

    /// Index of the piece whose closed node range contains the real node coordinate `s`.
    pub fn piece_index_at(&self, s: f64) -> usize {
        self.pieces
            .iter()
            .position(|p| s <= p.hi as f64 + 1e-9)
            .unwrap_or(self.pieces.len() - 1)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Pieces {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { lo: p.lo, hi: p.hi, values: p.values.iter().map(|&v| f(v)).collect() })
            .collect();
        Self::from_pieces(self.grid, pieces)
    }

    pub fn zip(&self, other: &Pieces, f: impl Fn(f64, f64) -> f64) -> Result<Pieces> {
        if self.grid != other.grid || self.breaks() != other.breaks() {
            return Err(Error::GridMismatch);
        }
        let pieces = self
            .pieces
            .iter()
            .zip(&other.pieces)
            .map(|(a, b)| Piece {
                lo: a.lo,
                hi: a.hi,
                values: a.values.iter().zip(&b.values).map(|(&x, &y)| f(x, y)).collect(),
            })
            .collect();
        Ok(Self::from_pieces(self.grid, pieces))
    }

    /// Samples with right-hand limits at breaks.
    pub fn to_field(&self) -> Field {
        let mut values = vec![0.0; self.grid.len()];
        for p in self.pieces.iter().rev() {
            for i in p.lo..=p.hi {
                values[i] = p.at(i);
            }
        }
        for p in &self.pieces {
            values[p.lo] = p.at(p.lo);
        }
        Field::from_raw(self.grid, values)
    }

    /// Smallest sample over every piece (both one-sided values at breaks) and its node.
    pub fn min_with_node(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for p in &self.pieces {
            for i in p.lo..=p.hi {
                if p.at(i) < best.0 {
                    best = (p.at(i), i);
                }
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.pieces.iter().flat_map(|p| p.values.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `order`-th derivative from one-sided high-order stencils inside each piece.
    pub fn derivative_of_order(&self, order: usize) -> Pieces {
        let dx = self.grid.dx();
        let scale = dx.powi(order as i32);
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let q = DIFF_POINTS.min(p.node_count());
                let mut cache: Option<Vec<f64>> = None;
                let values = (p.lo..=p.hi)
                    .map(|i| {
                        let start = (i as i64 - (q as i64 / 2))
                            .clamp(p.lo as i64, (p.hi + 1 - q) as i64)
                            as usize;
                        let centered = start + q / 2 == i && q % 2 == 1;
                        let w = if centered {
                            cache
                                .get_or_insert_with(|| {
                                    let nodes: Vec<f64> =
                                        (0..q).map(|k| k as f64 - (q / 2) as f64).collect();
                                    fornberg_weights(0.0, &nodes, order)
                                })
                                .clone()
                        } else {
                            let nodes: Vec<f64> =
                                (0..q).map(|k| (start + k) as f64 - i as f64).collect();
                            fornberg_weights(0.0, &nodes, order)
                        };
                        (0..q).map(|k| w[k] * p.at(start + k)).sum::<f64>() / scale
                    })
                    .collect();
                Piece { lo: p.lo, hi: p.hi, values }
            })
            .collect();
        Self::from_pieces(self.grid, pieces)
    }

    pub fn derivative(&self) -> Pieces {
        self.derivative_of_order(1)
    }

    pub fn second_derivative(&self) -> Pieces {
        self.derivative_of_order(2)
    }

    /// Integral over `[x_0, x_{N-1}]` plus the periodic wrap cell by the trapezoid rule.
    pub fn integrate(&self) -> f64 {
        let n = self.grid.len();
        let mut total: f64 = self
            .pieces
            .iter()
            .map(|p| integrate_piece_segment(&self.grid, p, p.lo as f64, p.hi as f64, &|i| p.at(i)))
            .sum();
        let first = self.pieces[0].at(0);
        let last = self.pieces[self.pieces.len() - 1].at(n - 1);
        total += 0.5 * self.grid.dx() * (first + last);
        total
    }

    /// Integral of `integrand(piece, node)` over `[a, b]` (positions), split at breaks.
    pub fn integrate_between_with(
        &self,
        a: f64,
        b: f64,
        integrand: &dyn Fn(usize, usize) -> f64,
    ) -> f64 {
        let to_s = |x: f64| (x + self.grid.half_length()) / self.grid.dx();
        let (sa, sb) = (to_s(a), to_s(b));
        if sb <= sa {
            return 0.0;
        }
        let mut total = 0.0;
        for (k, p) in self.pieces.iter().enumerate() {
            let lo = sa.max(p.lo as f64);
            let hi = sb.min(p.hi as f64);
            if hi > lo {
                total += integrate_piece_segment(&self.grid, p, lo, hi, &|i| integrand(k, i));
            }
        }
        total
    }

    pub fn integrate_between(&self, a: f64, b: f64) -> f64 {
        self.integrate_between_with(a, b, &|k, i| self.pieces[k].at(i))
    }

    /// `(m^2 - d^2)^{-1}` of these samples and its first derivative via the exponential kernel,
    /// accumulated left-to-right and right-to-left with cell quadrature inside each piece.
    pub fn helmholtz_inverse(&self, m: f64) -> Result<(Pieces, Pieces)> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParameter(format!("Helmholtz parameter must be positive, got {m}")));
        }
        let n = self.grid.len();
        let dx = self.grid.dx();
        let decay = (-m * dx).exp();
        let mut fwd = vec![0.0; n];
        let mut bwd = vec![0.0; n];
        for p in &self.pieces {
            let fw = CellWeights::new(p, dx, move |t| (-m * dx * (1.0 - t)).exp());
            for j in p.lo..p.hi {
                fwd[j + 1] = decay * fwd[j] + fw.apply(p, j);
            }
        }
        for p in self.pieces.iter().rev() {
            let bw = CellWeights::new(p, dx, move |t| (-m * dx * t).exp());
            for j in (p.lo..p.hi).rev() {
                bwd[j] = decay * bwd[j + 1] + bw.apply(p, j);
            }
        }
        let mut v_pieces = Vec::with_capacity(self.pieces.len());
        let mut vx_pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            let v: Vec<f64> = (p.lo..=p.hi).map(|j| (fwd[j] + bwd[j]) / (2.0 * m)).collect();
            let vx: Vec<f64> = (p.lo..=p.hi).map(|j| 0.5 * (bwd[j] - fwd[j])).collect();
            v_pieces.push(Piece { lo: p.lo, hi: p.hi, values: v });
            vx_pieces.push(Piece { lo: p.lo, hi: p.hi, values: vx });
        }
        Ok((Self::from_pieces(self.grid, v_pieces), Self::from_pieces(self.grid, vx_pieces)))
    }

    /// Local polynomial through up to seven nodes of the piece nearest `s`, evaluated with its
    /// first two derivatives (in node units).
    pub fn local_poly(&self, piece: usize, s: f64) -> (f64, f64, f64) {
        let p = &self.pieces[piece];
        let q = DIFF_POINTS.min(p.node_count());
        let start = (s.round() as i64 - (q as i64 / 2)).clamp(p.lo as i64, (p.hi + 1 - q) as i64) as usize;
        let nodes: Vec<f64> = (0..q).map(|k| (start + k) as f64 - s).collect();
        let w0 = fornberg_weights(0.0, &nodes, 0);
        let w1 = fornberg_weights(0.0, &nodes, 1);
        let w2 = if q >= 3 { fornberg_weights(0.0, &nodes, 2) } else { vec![0.0; q] };
        let mut out = (0.0, 0.0, 0.0);
        for k in 0..q {
            let f = p.at(start + k);
            out.0 += w0[k] * f;
            out.1 += w1[k] * f;
            out.2 += w2[k] * f;
        }
        out
    }
}

/// Interior and boundary weights for a weighted cell integral `∫_cell w(t) f dx`, `t` in `[0, 1]`.
struct CellWeights {
    dx: f64,
    interior: Option<Vec<f64>>,
    weight: Box<dyn Fn(f64) -> f64>,
}

impl CellWeights {
    fn new(p: &Piece, dx: f64, weight: impl Fn(f64) -> f64 + 'static) -> Self {
        let q = QUAD_ORDER.min(p.node_count());
        let interior = (q == QUAD_ORDER).then(|| {
            let c = (q / 2 - 1) as f64;
            segment_weights(0, q, c, c + 1.0, c, &weight)
        });
        Self { dx, interior, weight: Box::new(weight) }
    }

    fn apply(&self, p: &Piece, j: usize) -> f64 {
        let q = QUAD_ORDER.min(p.node_count());
        let start = p.stencil_start(q, j as f64 + 0.5);
        let owned;
        let w = match &self.interior {
            Some(w) if start + q / 2 - 1 == j => w,
            _ => {
                let rel = (j - start) as f64;
                owned = segment_weights(0, q, rel, rel + 1.0, rel, &self.weight);
                &owned
            }
        };
        (0..q).map(|k| w[k] * p.at(start + k)).sum::<f64>() * self.dx
    }
}

/// `∫_{lo}^{hi} ℓ_k(s) w(s - origin) ds` for Lagrange basis on nodes `start..start+q` (node units).
fn segment_weights(
    start: usize,
    q: usize,
    lo: f64,
    hi: f64,
    origin: f64,
    weight: &dyn Fn(f64) -> f64,
) -> Vec<f64> {
    let mut out = vec![0.0; q];
    let mut basis = vec![0.0; q];
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for (&g, &gw) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        let s = mid + half * g;
        lagrange_basis(start, q, s, &mut basis);
        let w = gw * half * weight(s - origin);
        for k in 0..q {
            out[k] += w * basis[k];
        }
    }
    out
}

/// `∫` over node coordinates `[lo, hi]` inside piece `p`, values supplied per node.
fn integrate_piece_segment(
    grid: &Grid,
    p: &Piece,
    lo: f64,
    hi: f64,
    value: &dyn Fn(usize) -> f64,
) -> f64 {
    let q = QUAD_ORDER.min(p.node_count());
    if q == 1 {
        return 0.0;
    }
    let dx = grid.dx();
    let unit = |_: f64| 1.0;
    let interior = segment_weights(0, q, (q / 2 - 1) as f64, (q / 2) as f64, 0.0, &unit);
    let mut total = 0.0;
    let mut a = lo;
    while a < hi - 1e-12 {
        let cell = (a + 1e-12).floor();
        let b = (cell + 1.0).min(hi);
        let start = p.stencil_start(q, 0.5 * (a + b));
        let full = (a - cell).abs() < 1e-12 && (b - cell - 1.0).abs() < 1e-12;
        let w = if full && q == QUAD_ORDER && start + q / 2 - 1 == cell as usize {
            interior.clone()
        } else {
            segment_weights(0, q, a - start as f64, b - start as f64, 0.0, &unit)
        };
        for k in 0..q {
            total += w[k] * value(start + k);
        }
        a = b;
    }
    total * dx
}
