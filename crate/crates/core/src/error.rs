use thiserror::Error;

use crate::lattice::LatticePoint;

/// Errors surfaced by domain construction, measure evaluation, the
/// enumeration oracle, samplers and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("vertex {0:?} is not part of the domain")]
    UnknownVertex(LatticePoint),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration does not match the domain: {0}")]
    ConfigMismatch(String),

    #[error("ice rule violated across edge #{edge} ({a:?} -> {b:?})")]
    IceRule { edge: usize, a: LatticePoint, b: LatticePoint },

    #[error("state space requires {required} weight evaluations, cap is {cap}")]
    CapExceeded { required: u128, cap: u128 },

    #[error("distribution tables are not over a common state space: {0}")]
    StateSpaceMismatch(String),

    #[error("estimator error: {0}")]
    Estimator(String),

    #[error("configuration file error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
