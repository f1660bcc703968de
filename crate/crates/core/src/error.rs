use std::path::PathBuf;

use thiserror::Error;

use crate::grunwald::DerivativeForm;
use crate::operators::BoundaryCondition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fractional order {0} is outside the open interval (1, 2)")]
    InvalidOrder(f64),

    #[error("invalid scheme specification: {0}")]
    InvalidSpec(String),

    #[error("no iteration matrix is defined for the {form} form with {left}/{right} boundaries")]
    UnsupportedCombination { form: DerivativeForm, left: BoundaryCondition, right: BoundaryCondition },

    #[error("operation is not defined for the {0} form")]
    UnsupportedForm(DerivativeForm),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("implicit system matrix is numerically singular")]
    SingularSystem,

    #[error("explicit step dt = {dt:e} exceeds the stability limit {limit:e}")]
    StabilityViolation { dt: f64, limit: f64 },

    #[error("time series contains no snapshots")]
    EmptySeries,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
