use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} samples but the grid has {expected} points")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("position {x} lies outside the periodic cell [{lo}, {hi})")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("no extrema above the amplitude floor {0:e}")]
    NoExtrema(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("extrema pairing violated: M_{index} = {max} < m_{prev} = {min}", prev = .index - 1)]
    Pairing { index: usize, max: f64, min: f64 },

    #[error("sequence ordering violated: {0}")]
    Ordering(String),

    #[error("no admissible perturbation found after {0} halvings")]
    Inadmissible(usize),

    #[error("trajectory too coarse: {0}")]
    TooCoarse(String),

    #[error("peakons already collide at t = 0 (gap {0:e})")]
    InitialCollision(f64),

    #[error("distance identity produced {0:e}, below the discretization gate")]
    NegativeDistance(f64),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("artifact error: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
