use thiserror::Error;

/// Errors produced by the coding toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(usize),
    #[error("field order {0} is outside the supported range 2..=1024")]
    UnsupportedField(usize),
    #[error("the zero element has no multiplicative order")]
    ZeroElement,
    #[error("length {0} is not a power of two")]
    LengthNotPowerOfTwo(usize),
    #[error("invalid frozen policy: {0}")]
    FrozenSetInvalid(String),
    #[error("sampler drew an observation with zero probability")]
    DegenerateSampler,
    #[error("enumeration needs {needed} terms, budget is {budget}")]
    TooLarge { needed: u128, budget: u128 },
    #[error("selection criterion admits no index")]
    EmptyInformationSet,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("code mismatch: {0}")]
    CodeMismatch(String),
    #[error("block length mismatch: expected {expected}, got {got}")]
    BlockLengthMismatch { expected: usize, got: usize },
    #[error("message length mismatch: expected {expected}, got {got}")]
    MessageLengthMismatch { expected: usize, got: usize },
    #[error("no constellation of size {0} in this family")]
    UnsupportedSize(usize),
    #[error("bad packing file: {0}")]
    BadPackingFile(String),
    #[error("packing has {0} points, which is not a supported field order")]
    CountNotFieldOrder(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}
