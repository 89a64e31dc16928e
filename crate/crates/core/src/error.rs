use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("node {index} lies outside the domain")]
    OutsideDomain { index: usize },

    #[error("field is undefined at {point:?}: {reason}")]
    Undefined { point: Vec<f64>, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("insufficient decay data: {usable} usable entries, need at least 3")]
    InsufficientDecayData { usable: usize },

    #[error("grid too large for exhaustive scan: {nodes} nodes (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },

    #[error("mask is not a subset: {0}")]
    NotSubset(String),

    #[error("gf1 format error at line {line}: {reason}")]
    Format { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
