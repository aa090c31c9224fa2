//! Adaptive confidence bands for self-similar functions observed in
//! Gaussian white noise.
//!
//! The crate builds multiscale kernel estimates of an unknown function,
//! calibrates critical values by Monte Carlo so that the estimates
//! concentrate around their projections simultaneously across dyadic
//! levels, derives a data-driven interval for the smoothness exponent from
//! scale comparisons, and assembles a confidence band whose width adapts
//! to the unknown regularity. Constructive families of self-similar test
//! functions and a numerical class-membership oracle support Monte Carlo
//! studies of coverage, width rates and the cost of the self-similarity
//! constant.

pub mod band;
pub mod calibrate;
pub mod config;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod families;
pub mod gamma;
pub mod grid;
pub mod kernel;
pub mod noise;

pub use band::{build_band, BandConfig, BandResult};
pub use calibrate::{calibrate_cbar, CriticalValueRule, LevelRange};
pub use error::{Error, Result};
pub use gamma::{gamma_interval, GammaInterval, RegularityRanges};
pub use grid::{Grid, GridFunction};
pub use kernel::Kernel;
pub use noise::{delta_hat, kernel_estimate, synthesize, Observation};
