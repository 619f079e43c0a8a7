use thiserror::Error;

use crate::expr::EvalError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column} near {token:?}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        token: String,
        message: String,
    },
    #[error("unknown elementary function `{name}` at {line}:{column}")]
    UnknownFunction {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("invalid symbol name {0:?}")]
    InvalidSymbol(String),
    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("variance mismatch: {0}")]
    VarianceMismatch(String),
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("tensor shape error: {0}")]
    Shape(String),

    #[error("symmetric part of the metric is singular at every probe point")]
    Singular,
    #[error("unsupported: {0}")]
    Capability(String),
    #[error("curvature kind {0} out of range (expected 0..=5)")]
    KindOutOfRange(usize),
    #[error("covariant derivative kind {0} out of range (expected 0..=3)")]
    DerivativeKindOutOfRange(usize),
    #[error("metric is not of the diagonal, time-only ansatz shape: {0}")]
    NotAnsatzShape(String),
    #[error("stress tensor is not symmetric")]
    NonSymmetric,
    #[error("velocity cannot be normalised: {0}")]
    Unnormalizable(String),
    #[error("metric sign is not constant over the probe domain")]
    IndefiniteSign,

    #[error("{path}: {message}")]
    Spec { path: String, message: String },
    #[error("unknown case {0:?}")]
    UnknownCase(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("binding gap: {0}")]
    BindingGap(String),
    #[error("manifest error: {0}")]
    Manifest(String),
}

impl Error {
    /// True for failures caused by the caller's input rather than the mathematics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownFunction { .. }
                | Error::InvalidSymbol(_)
                | Error::Spec { .. }
                | Error::UnknownCase(_)
                | Error::UnknownPreset(_)
                | Error::KindOutOfRange(_)
                | Error::DerivativeKindOutOfRange(_)
        )
    }
}
