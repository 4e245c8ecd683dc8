use thiserror::Error;

/// Errors raised by the numerical kernels, operators, and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("step size must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("inverted bounds at index {index}: lo {lo} > hi {hi}")]
    InvertedBounds { index: usize, lo: f64, hi: f64 },
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("term has no finite Lipschitz bound")]
    UnboundedLipschitz,
    #[error("smoothing recursion denominator is not positive ({0:e})")]
    DegenerateDenominator(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("audit `{check}` failed at index {index}: {detail}")]
    AuditFailure {
        check: &'static str,
        index: usize,
        detail: String,
    },
    #[error("iterate diverged at iteration {iter} (norm {norm:e})")]
    NonFiniteIterate { iter: usize, norm: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("reference not certified: reached {reached:e}, target {target:e}")]
    NotCertified { reached: f64, target: f64 },
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
