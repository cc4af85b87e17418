use thiserror::Error;

use crate::moments::FeasibilityReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("basis columns are linearly dependent (rank {rank} < {cols})")]
    InvalidBasis { rank: usize, cols: usize },

    #[error("matrix is not complex symmetric (deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("invalid conjugation: {0}")]
    InvalidConjugation(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("shift operator is ill-defined: {0}")]
    IllDefinedOperator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operator not invertible on its domain; it has no J-unitary extension")]
    NotInvertible,

    #[error("unsupported defect dimension {0} (only 1 is constructive)")]
    UnsupportedDefect(usize),

    #[error("quadratic equation has no roots; no J-unitary extension exists")]
    NoRoot,

    #[error("root index {index} out of range ({available} available)")]
    RootIndexOutOfRange { index: usize, available: usize },

    #[error("necessary conditions fail (symmetric: {}, shift: {})", .0.symmetric, .0.shift_condition)]
    NecessaryFailed(Box<FeasibilityReport>),

    #[error("degenerate moment matrix: no tested factorization satisfies kernel inclusion")]
    Undecided(Box<FeasibilityReport>),

    #[error("instance generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

impl Error {
    /// Stable machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::NotSquare { .. } => "not-square",
            Error::NonFinite(_) => "non-finite",
            Error::DecompositionFailed(_) => "decomposition-failure",
            Error::InvalidBasis { .. } => "invalid-basis",
            Error::NotSymmetric { .. } => "not-symmetric",
            Error::InvalidConjugation(_) => "invalid-conjugation",
            Error::InconsistentInput(_) => "inconsistent-input",
            Error::IllDefinedOperator(_) => "ill-defined-operator",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Precondition(_) => "precondition",
            Error::NotInvertible => "not-invertible",
            Error::UnsupportedDefect(_) => "unsupported-defect",
            Error::NoRoot => "no-root",
            Error::RootIndexOutOfRange { .. } => "root-index-out-of-range",
            Error::NecessaryFailed(_) => "necessary-failed",
            Error::Undecided(_) => "undecided",
            Error::GenerationFailed { .. } => "generation-failure",
            Error::InvalidProblem(_) => "invalid-problem",
        }
    }

    /// True for the J-unitary extension obstructions.
    pub fn is_extension_obstruction(&self) -> bool {
        matches!(
            self,
            Error::NotInvertible | Error::UnsupportedDefect(_) | Error::NoRoot
        )
    }
}
