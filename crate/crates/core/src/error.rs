use thiserror::Error;

/// Errors raised by matrix construction, spectral calculus and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is empty")]
    Empty,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: |m_ij - conj(m_ji)| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e} <= threshold {threshold:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, threshold: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {matrices} matrices but {weights} weights")]
    LengthMismatch { matrices: usize, weights: usize },

    #[error("no matrices supplied")]
    NoMatrices,

    #[error("eigensolver did not converge for a {dim}x{dim} Hermitian matrix")]
    EigenNoConvergence { dim: usize },

    #[error("singular value decomposition did not converge for a {dim}x{dim} matrix")]
    SvdNoConvergence { dim: usize },

    #[error("spectral function is undefined at eigenvalue {eigenvalue:e}")]
    SpectralDomain { eigenvalue: f64 },

    #[error("matrix is numerically singular: smallest/largest singular value = {ratio:e}")]
    Singular { ratio: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative radicand {value:e} in {what} beyond tolerance {tolerance:e}")]
    NegativeRadicand {
        what: &'static str,
        value: f64,
        tolerance: f64,
    },

    #[error("no objective is defined for {0}")]
    UnsupportedObjective(String),

    #[error("closed form is not available for {0}")]
    UnsupportedClosedForm(String),

    #[error("eigenvalue {eigenvalue:e} lies outside the image ({lower:e}, {upper:e}) of the mother function derivative")]
    OutsideDerivativeImage { eigenvalue: f64, lower: f64, upper: f64 },

    #[error("quadrature did not converge: last change {change:e} with {nodes} nodes")]
    QuadratureNoConvergence { change: f64, nodes: usize },

    #[error("spectral bracket violated at iteration {iteration}: spectrum [{min:e}, {max:e}] outside [{alpha:e}, {beta:e}]")]
    BracketViolation {
        iteration: usize,
        min: f64,
        max: f64,
        alpha: f64,
        beta: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
