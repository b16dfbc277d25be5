use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid word {word:?} for alphabet of size {letters}")]
    InvalidWord { word: Vec<usize>, letters: usize },

    #[error("constant coefficient is singular (smallest singular value {smallest:e})")]
    SingularConstant { smallest: f64 },

    #[error("not a contraction (norm {norm})")]
    NotContraction { norm: f64 },

    #[error("constant coefficient is unitary but higher coefficients do not vanish (max {max_tail:e})")]
    UnitaryWithTail { max_tail: f64 },

    #[error("row factorization failed at block {block}: residual {residual:e}")]
    RowFactorization { block: usize, residual: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("constant coefficient of the solution factor vanishes")]
    DegenerateFactor,

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("realization formula requires |A0| < 1, got {norm}")]
    ResolventDivergent { norm: f64 },

    #[error("invalid point {index}: {reason}")]
    InvalidPoint { index: usize, reason: String },

    #[error("{0}")]
    Invalid(String),
}
