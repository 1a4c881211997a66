use thiserror::Error;

/// Errors across the toolkit. `Refusal` is reserved for operations that
/// decline to produce an uncertified result; everything else is invalid
/// input or an internal consistency failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent p = {0}; need p >= 1")]
    InvalidExponent(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("basis matrix is singular or badly conditioned")]
    SingularBasis,
    #[error("projection index {n} out of range 1..={dim}")]
    ProjectionOutOfRange { n: usize, dim: usize },
    #[error("net centers are not contained in the span of the first {n} basis vectors")]
    CentersOutsideSpan { n: usize },
    #[error("value of member {member} at atom {atom} lies outside the cover (distance {distance})")]
    ValueOutsideCover {
        member: usize,
        atom: usize,
        distance: f64,
    },
    #[error("refinement exhausted: schedule stage {stage} left fewer than 2 survivors (deepest completed stage: {deepest})")]
    RefinementExhausted { stage: usize, deepest: usize },
    #[error("stage budget exhausted: n_max = {n_max} below n0 = {n0}")]
    StageBudgetExhausted { n_max: usize, n0: usize },
    #[error("level grid exhausted; best residual {best_residual}")]
    GridExhausted { best_residual: f64 },
    #[error("certificate precondition failed: {0}")]
    Refusal(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for the refusal path (certificates unmet), as opposed to an
    /// invalid-input or internal error.
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Refusal(_))
    }
}
