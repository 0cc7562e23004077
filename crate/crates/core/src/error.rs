use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("point lies within {tolerance:e} of the contact plane q{i}=q{j}")]
    AmbiguousClassification { i: usize, j: usize, tolerance: f64 },

    #[error("root not bracketed in [{lo}, {hi}]: f(lo)={f_lo:e}, f(hi)={f_hi:e}")]
    NotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("chart error: {0}")]
    Chart(String),

    #[error("quadrature not converged: entry moved by {change:e} when doubling nodes")]
    Quadrature { change: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("symmetry error: {0}")]
    Symmetry(String),

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    EigenNotConverged { residual: f64, iterations: usize },

    #[error("no crossing found in [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("integration error: {0}")]
    Integration(String),

    #[error("incompatible symmetry: {0}")]
    IncompatibleSymmetry(String),

    #[error("config error: {0}")]
    Config(String),
}
