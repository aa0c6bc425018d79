use thiserror::Error;

/// Errors produced by the simulator and the analytic evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty device group `{group}`: pairing requires at least one device per group")]
    EmptyGroup { group: &'static str },

    #[error("no non-empty deployment after {attempts} draws (mean count {mean_count:e})")]
    RetryCapExceeded { attempts: u64, mean_count: f64 },

    #[error("quadrature did not converge: error estimate {achieved:e} exceeds tolerance {requested:e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("domain error in {function}: {reason}")]
    Domain { function: &'static str, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
