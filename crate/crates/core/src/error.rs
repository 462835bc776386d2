use thiserror::Error;

use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel evaluation of {what} returned a non-finite value at ({x1}, {x2})")]
    KernelEvaluation { what: &'static str, x1: f64, x2: f64 },

    #[error("operator is numerically singular (estimated condition number {condition:e})")]
    SingularOperator { condition: f64 },

    #[error("iterative solve did not converge after {iterations} iterations (last relative residual {last:e})")]
    Convergence { iterations: usize, last: f64, history: Vec<f64> },

    #[error("backward check failed: relative residual {residual:e} exceeds {bound:e}")]
    BackwardCheck { residual: f64, bound: f64 },

    #[error("G(λ) is near-singular at λ = ({}, {}) (condition {condition:e})", .lambda[0], .lambda[1])]
    NearSingularG { lambda: [C64; 2], condition: f64 },

    #[error("|μ_{k} − λ_{k}| = {gap:e} is below the pole tolerance; use the i = {advise} form instead")]
    PoleProximity { k: usize, gap: f64, advise: usize },

    #[error("λ and μ coincide in both coordinates; no structured form is available")]
    UnsupportedEvaluation,

    #[error("g-pair rejected: symmetry residual {residual:e} exceeds {bound:e}")]
    GSymmetry { residual: f64, bound: f64 },

    #[error("dense assembly of {size} unknowns exceeds the guard of {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
