use thiserror::Error;

/// Errors raised by state construction, validation and the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has dimension zero")]
    Empty,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("trace is not 1 (got {re} + {im}i)")]
    TraceNotUnity { re: f64, im: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NegativeEigenvalue { min_eigenvalue: f64 },

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Kraus operators violate completeness (residual {residual:e})")]
    IncompleteChannel { residual: f64 },

    #[error(
        "Fock truncation n_max={n_max} is inadequate (population deficit {deficit:e}); try n_max >= {suggested}"
    )]
    Truncation {
        n_max: usize,
        deficit: f64,
        suggested: usize,
    },

    #[error("{what} did not converge after {iterations} iterations: {detail}")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        detail: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by the input rather than by a failed computation.
    pub fn is_bad_input(&self) -> bool {
        !matches!(
            self,
            Error::NonConvergence { .. } | Error::Truncation { .. } | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
