use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("grid {rows}x{cols} does not divide image {height}x{width}")]
    NonDivisible {
        height: usize,
        width: usize,
        rows: usize,
        cols: usize,
    },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("pixel value {0} outside [0, 1]")]
    PixelOutOfRange(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("amplitude must be non-negative, found {0}")]
    NegativeAmplitude(f64),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("similarity undefined: input has zero variance")]
    ZeroVariance,
    #[error("cosine undefined for a zero-norm vector")]
    ZeroNorm,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
