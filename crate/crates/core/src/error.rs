use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid disorder law: {0}")]
    InvalidLaw(String),

    #[error("means differ by {difference:.3e} (> {tolerance:.3e}); convex order undefined")]
    UnequalMeans { difference: f64, tolerance: f64 },

    #[error("grid maximum of g sits on the grid boundary at x = {x:.3e}; extend the grid")]
    GridBoundaryMaximum { x: f64 },

    #[error("collision sum not converged: beta2 band width {width:.3e} exceeds tolerance {tolerance:.3e}")]
    CollisionSumNotConverged { width: f64, tolerance: f64 },

    #[error("no positive root for phi(v): v * J_N = {mass:.6} <= 1; increase N (now {n}) or v")]
    PhiNoRoot { mass: f64, n: usize },

    #[error("marginal normalization off by {deviation:.3e} at time {time}")]
    MarginalNormalization { time: usize, deviation: f64 },

    #[error("kernel table has {available} entries, horizon {required} requested")]
    KernelTooShort { available: usize, required: usize },

    #[error("need at least {required} replicas for a variance estimate, got {got}")]
    TooFewReplicas { required: usize, got: usize },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
