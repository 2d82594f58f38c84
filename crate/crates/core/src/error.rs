//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Numerical check *failures* (a probe finding a residual above tolerance)
/// are not errors; they are reported in the corresponding report struct.
/// Errors are contract violations: wrong dimensions, points outside declared
/// domains, degenerate inputs, or requests the engine cannot serve.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("jet order {requested} exceeds the supported maximum {max}")]
    UnsupportedOrder { requested: usize, max: usize },

    #[error("degenerate region: no probe samples available ({context})")]
    DegenerateRegion { context: String },

    #[error("region sample {index} violates the region contract: {reason}")]
    BadRegionSample { index: usize, reason: String },

    #[error("chart `{chart}` failed construction: {reason}")]
    BadChart { chart: String, reason: String },

    #[error("charts `{chart1}` and `{chart2}` are not smoothly compatible (max residual {residual:.3e})")]
    IncompatibleCharts {
        chart1: String,
        chart2: String,
        residual: f64,
    },

    #[error("submanifold restriction dropped every chart")]
    EmptySubmanifold,

    #[error("point is outside the domain of chart `{chart}`")]
    OutOfDomain { chart: String },

    #[error("point is outside the manifold carrier")]
    OutOfCarrier,

    #[error("no atlas chart pair witnesses smoothness at the requested point")]
    OutOfAtlas,

    #[error("evaluation produced non-finite values ({context})")]
    EvaluationFailure { context: String },

    #[error("matrix is numerically singular (|det| = {det:.3e})")]
    SingularMatrix { det: f64 },

    #[error("span test is inconclusive: sample matrix is rank-deficient ({context})")]
    InconclusiveSpan { context: String },

    #[error("vector field components are inconsistent across charts `{chart1}`/`{chart2}` (residual {residual:.3e})")]
    InconsistentComponents {
        chart1: String,
        chart2: String,
        residual: f64,
    },

    #[error("not a Lie group: {reason}")]
    NotALieGroup { reason: String },

    #[error("composition has an empty sampled domain")]
    EmptyComposition,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(expected: usize, actual: usize, context: &'static str) -> Self {
        Error::DimensionMismatch {
            expected,
            actual,
            context,
        }
    }
}
