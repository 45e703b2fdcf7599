//! Periodic-grid fields with spectral calculus and Helmholtz-type inverses.

mod fft;
#[allow(clippy::module_inception)]
mod field;
mod grid;
pub mod piecewise;

pub use field::{Field, Interpolation, Spectrum};
pub use grid::{Grid, DEFAULT_HALF_LENGTH, DEFAULT_POINTS};
pub use piecewise::{Piece, Pieces};

#[allow(unused_imports)]
pub(crate) use fft::{forward, inverse_real, mode_index, plan_forward, plan_inverse};
