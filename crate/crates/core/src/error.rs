use thiserror::Error;

use crate::translation::MomentSet;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("alpha level {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("cut at level {upper} is not contained in the cut at level {lower}")]
    NotNested { lower: f64, upper: f64 },

    #[error("arc length {s} outside [0, {total}]")]
    ArcLengthOutOfRange { s: f64, total: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("evaluation failed at z = {z:?}: {source}")]
    Evaluation { z: Vec<f64>, source: Box<Error> },

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("non-positive coefficient at x = {x}")]
    NonPositiveCoefficient { x: f64 },

    #[error(
        "no beta law matches skewness {} and excess kurtosis {} (nearest feasible excess kurtosis {suggested_excess_kurtosis})",
        moments.skewness, moments.excess_kurtosis
    )]
    Infeasible { moments: MomentSet, suggested_excess_kurtosis: f64 },

    #[error("samples have zero spread; skewness and kurtosis are undefined")]
    DegenerateSpread,

    #[error("fiber packing failed: target fraction {target}, achieved {achieved}")]
    PackingFailure { target: f64, achieved: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerical pipeline, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Evaluation { .. }
            | Error::NonFinite(_)
            | Error::NonPositiveCoefficient { .. }
            | Error::Infeasible { .. }
            | Error::DegenerateSpread
            | Error::PackingFailure { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
