use thiserror::Error;

/// Errors raised by the solvers and the inversion pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("CFL violation: dt = {dt:e} exceeds the stability limit {required:e}; use dt <= {required:e}")]
    Cfl { dt: f64, required: f64 },

    #[error(
        "degenerate mass coefficient: min(1 - 2 kappa v) = {min:e} < floor {floor:e} at time step {time_index}, node {node_index}"
    )]
    Degenerate {
        min: f64,
        floor: f64,
        time_index: usize,
        node_index: usize,
    },

    #[error("source amplitude too large: fixed-point residual grew for 3 consecutive iterations (history {history:?})")]
    AmplitudeTooLarge { history: Vec<f64> },

    #[error("{what} did not converge after {iterations} iterations (achieved {achieved:e}, requested {requested:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        achieved: f64,
        requested: f64,
    },

    #[error(
        "quadrature did not converge: achieved tolerance {achieved:e}, requested {requested:e}"
    )]
    Quadrature { achieved: f64, requested: f64 },

    #[error("support violation: {0}")]
    Support(String),

    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(expected: impl ToString, got: impl ToString) -> Error {
    Error::ShapeMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
