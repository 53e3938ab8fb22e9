use thiserror::Error;

/// Errors raised by the numerical engine.
///
/// Every variant maps to a stable machine-readable [`Error::code`] that names
/// the violated invariant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("incompatible contraction: {0}")]
    Contraction(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0} (must be 1, 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("mode {0} lies outside the lattice box")]
    ModeOutOfRange(String),
    #[error("duplicate mode {0}")]
    DuplicateMode(String),
    #[error("sequence has a nonzero mean (zero mode coefficient)")]
    NonzeroMean,
    #[error("coefficients are not Hermitian: mode {0}")]
    NotHermitian(String),
    #[error("coefficient matrix is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("A0 is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("invalid factor count {0} (allowed 2..=6)")]
    FactorCount(usize),
    #[error("ellipticity violated at gamma = {gamma}: min eigenvalue {min_eig} < {bound}")]
    Ellipticity { gamma: f64, min_eig: f64, bound: f64 },
    #[error("cell solver did not converge at gamma = {gamma} (residual {residual})")]
    NonConvergence { gamma: f64, residual: f64 },
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable identifier of the violated invariant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::Contraction(_) => "incompatible-contraction",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::UnsupportedDimension(_) => "unsupported-dimension",
            Error::ModeOutOfRange(_) => "mode-out-of-range",
            Error::DuplicateMode(_) => "duplicate-mode",
            Error::NonzeroMean => "nonzero-mean",
            Error::NotHermitian(_) => "not-hermitian",
            Error::NotSymmetric(_) => "not-symmetric",
            Error::NotPositiveDefinite(_) => "a0-not-spd",
            Error::RankMismatch(_) => "rank-mismatch",
            Error::FactorCount(_) => "factor-count",
            Error::Ellipticity { .. } => "ellipticity",
            Error::NonConvergence { .. } => "non-convergence",
            Error::IllConditionedFit(_) => "ill-conditioned-fit",
            Error::GridTooCoarse(_) => "grid-too-coarse",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }

    /// True for failures of the numerics rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Ellipticity { .. } | Error::NonConvergence { .. } | Error::IllConditionedFit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
