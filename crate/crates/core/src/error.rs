use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters sit outside the regime where a formula or family is defined.
    #[error("{op}: regime violation: {condition}")]
    Regime { op: &'static str, condition: String },

    #[error("{op}: precondition failed: {condition}")]
    Precondition { op: &'static str, condition: String },

    #[error("moment of order {order} diverges for s = {s} (needs -1/s > {})", order + 1)]
    DivergentMoment { order: u32, s: f64 },

    #[error("feasible set is empty: |center| = {center_norm} > 1 + radius = {}", 1.0 + radius)]
    Infeasible { center_norm: f64, radius: f64 },

    #[error("labeled set is not separable ({detail})")]
    NonSeparable { detail: String },

    #[error("band acceptance stalled after {rejections} consecutive rejections")]
    StreamExhausted { rejections: u64 },

    #[error("band acceptance {acceptance:.3e} is below 1e-3")]
    Starvation { acceptance: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn regime(op: &'static str, condition: impl Into<String>) -> Error {
    Error::Regime { op, condition: condition.into() }
}

pub(crate) fn precondition(op: &'static str, condition: impl Into<String>) -> Error {
    Error::Precondition { op, condition: condition.into() }
}
