use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("random source produced {0} consecutive zero draws")]
    RngFault(usize),

    #[error("quadrature did not converge: estimate {estimate:e} with error {abs_error:e} after {evaluations} evaluations")]
    NonConvergence {
        estimate: f64,
        abs_error: f64,
        evaluations: usize,
    },

    #[error("only {events} outage events at grid point {index} (need at least {required})")]
    InsufficientEvents {
        index: usize,
        events: u64,
        required: u64,
    },

    #[error("tail contribution did not shrink: {0}")]
    Divergence(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
