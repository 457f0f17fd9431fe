use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Expr(#[from] ExprError),

    /// An expression failed while evaluating the right-hand side at a mesh node.
    #[error("evaluation failed at node {node} (t = {t:e}): {source}")]
    AtNode {
        node: usize,
        t: f64,
        #[source]
        source: ExprError,
    },

    #[error("picard iteration did not converge after {iterations} iterations (last residual {:e})", residuals.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("scalar fixed-point iteration diverged at node {node} (t = {t:e})")]
    MarchDivergence { node: usize, t: f64 },

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("{0}")]
    Numerical(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
