use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{distance} distance is undefined for an empty pattern ({which})")]
    EmptyInput {
        distance: &'static str,
        which: &'static str,
    },

    #[error("{distance} distance is undefined for empty patterns: {}", ids.join(", "))]
    EmptyPatterns {
        distance: &'static str,
        ids: Vec<String>,
    },

    #[error("cardinality/feature decomposition is undefined when both patterns are empty")]
    BothEmpty,

    #[error("element kinds are incompatible with the {0} base distance")]
    IncompatibleElements(&'static str),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("class {label} has {size} members, need at least {needed}")]
    ClassTooSmall {
        label: u32,
        size: usize,
        needed: usize,
    },

    #[error("degenerate class separation: {0}")]
    DegenerateSeparation(String),

    #[error("degenerate normal set: {0}")]
    Degenerate(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
