use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid dimensions or spacing violate the grid invariants.
    InvalidGrid(String),
    /// Field data length or values do not match the grid.
    InvalidField(String),
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// The direct Green's-function convolution was asked to handle more cells
    /// than configured and the FFT path is disabled.
    DirectSolveTooLarge { cells: usize, limit: usize },
    /// RBF system is singular because sample positions coincide.
    DuplicateSamples(Vec<(usize, usize)>),
    /// Generic precondition failure on an argument.
    InvalidInput(String),
    /// RANSAC could not find a consensus set of the required size.
    FitFailed { best_inliers: usize, required: usize },
    /// The training loss became NaN or infinite.
    NonFiniteLoss { iteration: usize },
    /// Input dimension does not match the model.
    DimensionMismatch { expected: usize, found: usize },
    /// The tangential load is larger than the friction limit allows.
    PhysicalConsistency { f_t: f64, limit: f64 },
    /// Plant or scenario parameters are out of range.
    InvalidPlant(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(m) => write!(f, "invalid grid: {m}"),
            Error::InvalidField(m) => write!(f, "invalid field: {m}"),
            Error::GridMismatch => write!(f, "fields are defined on different grids"),
            Error::DirectSolveTooLarge { cells, limit } => write!(
                f,
                "direct Poisson solve on {cells} cells exceeds the limit of {limit}; enable the FFT path"
            ),
            Error::DuplicateSamples(pairs) => {
                write!(f, "singular RBF system, duplicate sample positions:")?;
                for (a, b) in pairs {
                    write!(f, " ({a}, {b})")?;
                }
                Ok(())
            }
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::FitFailed { best_inliers, required } => write!(
                f,
                "RANSAC fit failed: best consensus has {best_inliers} inliers, {required} required"
            ),
            Error::NonFiniteLoss { iteration } => {
                write!(f, "training loss became non-finite at iteration {iteration}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::PhysicalConsistency { f_t, limit } => write!(
                f,
                "tangential force {f_t} N exceeds the friction limit {limit} N"
            ),
            Error::InvalidPlant(m) => write!(f, "invalid plant: {m}"),
        }
    }
}

impl core::error::Error for Error {}
