use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("non-finite loss encountered")]
    NonFiniteLoss,

    #[error("activation `{name}` is not supported: {reason}")]
    UnsupportedActivation { name: String, reason: &'static str },

    #[error("invalid network spec: {0}")]
    InvalidSpec(String),

    #[error("width condition violated: {0}")]
    WidthCondition(String),

    #[error("depth mismatch: teacher depth {teacher} vs student depth {student}")]
    DepthMismatch { teacher: usize, student: usize },

    #[error("parameter {value:.6e} at index {index} exceeds domain box [-{half_width}, {half_width}]")]
    BoxOverflow {
        index: usize,
        value: f64,
        half_width: f64,
    },

    #[error("sampler exhausted its iteration budget of {0}")]
    Exhausted(usize),

    #[error("pattern-search step size underflowed (alpha = {0:.3e})")]
    StepUnderflow(f64),

    #[error("too few points: need at least {needed}, have {have}")]
    TooFewPoints { needed: usize, have: usize },

    #[error("no successful trials to evaluate")]
    NoSuccessfulTrials,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
