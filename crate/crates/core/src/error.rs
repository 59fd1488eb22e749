use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mask has no support")]
    EmptyMask,
    #[error("area ratio {0:.3} is outside every shape class band")]
    UnclassifiableRatio(f64),
    #[error("unknown shape id {0}")]
    UnknownShape(usize),
    #[error("shape {0} is not part of the simplified-scheme shape set")]
    NotSimplifiedShape(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("atom {0:?} is degenerate on this support")]
    DegenerateAtom((usize, usize)),
    #[error("level {0} is outside the codable range")]
    LevelOutOfRange(i64),
    #[error("corrupt bitstream: {0}")]
    CorruptStream(&'static str),
    #[error("bad container: {0}")]
    BadContainer(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
