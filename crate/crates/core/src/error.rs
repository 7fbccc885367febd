use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid family parameters: {0}")]
    InvalidParams(String),

    #[error("series did not converge after {terms} terms (relative tail {tail:e})")]
    Convergence { terms: usize, tail: f64 },

    #[error("insufficient moments: need order {needed}, have {available}")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("window ({n}, {m}) exceeds the {mode} precision cap n + m <= {cap}")]
    WindowTooLarge {
        n: usize,
        m: usize,
        cap: usize,
        mode: &'static str,
    },

    #[error("non-normal multi-indices {indices:?}")]
    NotNormal { indices: Vec<(usize, usize)> },

    #[error("recurrence routes disagree at {index:?}: discrepancy {discrepancy:e}")]
    InconsistentField { index: (usize, usize), discrepancy: f64 },

    #[error("table is not generated by a nearest-neighbor recurrence at {index:?}: residual {residual:e}")]
    Fit { index: (usize, usize), residual: f64 },

    #[error("vanishing c - d at {indices:?}")]
    DegenerateDenominator { indices: Vec<(usize, usize)> },

    #[error("degenerate reconstruction system at cell {cell:?}: determinant {det:e}")]
    DegenerateSystem { cell: (usize, usize), det: f64 },

    #[error("overlapping reconstruction cells disagree by {consistency:e}")]
    InconsistentOverlap { consistency: f64 },

    #[error("field is not symmetrizable: max residual {residual:e}")]
    NotSymmetrizable { residual: f64 },

    #[error("path dependence {discrepancy:e} at {index:?}")]
    PathInconsistent { index: (usize, usize), discrepancy: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
