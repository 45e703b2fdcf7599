pub mod error;
pub mod field;
pub mod evolution;
pub mod functionals;
pub mod harness;
pub mod profiles;
pub mod stability;

pub use error::{Error, Result};
