use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("operator is not Hermitian: max deviation {0:.3e}")]
    NotHermitian(f64),

    #[error("operator is not positive semi-definite: min eigenvalue {0:.3e}")]
    NotPsd(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("solver did not converge: {0}")]
    SolverFailure(String),

    #[error("value is infinite: {0}")]
    Infinite(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported size: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
