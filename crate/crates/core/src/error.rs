use alloc::string::String;

/// Failures reported by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("expected {expected} samples, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("operands live on different grids")]
    DomainMismatch,
    #[error("non-finite sample at grid index {index}")]
    NonFinite { index: usize },
    #[error("division by a zero sample at grid index {index}")]
    Singularity { index: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(
        "module structure violated: multiplier residual {multiplier:e}, operand residual {operand:e}, product residual {product:e}"
    )]
    ModuleStructure {
        multiplier: f64,
        operand: f64,
        product: f64,
    },
    #[error("corpus is empty")]
    EmptyCorpus,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
