//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at node {index}")]
    NonFiniteValue { index: usize },

    #[error("interval [{lo}, {hi}] outside grid range [{grid_lo}, {grid_hi}]")]
    IntervalOutsideGrid {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("smoothness exponent must be positive, got {0}")]
    NonPositiveGamma(f64),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("grid margin too narrow for level {j}: window half-width {window} exceeds margin {margin}")]
    MarginTooNarrow { j: i32, window: f64, margin: f64 },

    #[error("level {j} under-resolved: kernel window {window} below two grid cells {min}")]
    UnderResolved { j: i32, window: f64, min: f64 },

    #[error("grids do not match")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("level {j} outside calibrated range {lo}..={hi}")]
    LevelOutOfRange { j: i32, lo: i32, hi: i32 },

    #[error("scale pair requires j2 > j1, got j1={j1}, j2={j2}")]
    BadScalePair { j1: i32, j2: i32 },

    #[error("empty {0}")]
    EmptyInput(&'static str),

    #[error("unknown kernel '{0}'")]
    UnknownKernel(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
