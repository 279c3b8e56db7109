use crate::expr::Expr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurvError {
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    #[error("unbound symbol `{name}`")]
    UnboundSymbol { name: String },

    #[error("unbound function `{name}`")]
    UnboundFunction { name: String },

    #[error("domain error in `{expr}`: {msg}")]
    Domain { expr: Expr, msg: String },

    #[error("cannot take a formal partial derivative of multi-argument function `{name}`")]
    FormalDerivative { name: String },

    #[error("singular metric: {0}")]
    SingularMetric(String),

    #[error("unstable numeric decision: {0}")]
    Unstable(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CurvError>;
