use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 16")]
    BadGridSize(usize),
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("scale {j} exceeds the grid limit {j_max}")]
    ScaleOutOfRange { j: u32, j_max: u32 },
    #[error("alpha must lie in [1, 2), got {0}")]
    BadAlpha(f64),
    #[error("eps must satisfy 0 < eps < (2 - alpha)/4 = {bound}, got {eps}")]
    BadEps { eps: f64, bound: f64 },
    #[error("shear {l} outside |l| <= {range} at scale {j}")]
    ShearOutOfRange { j: u32, l: i64, range: i64 },
    #[error("invalid model: {0}")]
    Model(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed grid file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
