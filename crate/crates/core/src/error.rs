use thiserror::Error;

/// Errors raised anywhere in the assessment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series has order {got}, at least {needed} required")]
    InsufficientOrder { needed: usize, got: usize },
    #[error("series is singular at the origin (leading coefficient is zero)")]
    SingularAtOrigin,
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("contracted time must lie in [0, {horizon}), got {tau}")]
    TauOutOfRange { tau: f64, horizon: f64 },
    #[error("invalid model parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("no equilibrium exists: {0}")]
    NoEquilibrium(String),
    #[error("singular matrix in {0}")]
    SingularMatrix(&'static str),
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonNonConvergence { iterations: usize, residual: f64 },
    #[error("initial condition violates the algebraic constraints (|g| = {residual:e})")]
    InconsistentInitialCondition { residual: f64 },
    #[error("initial state is already at the equilibrium (squared distance {distance_sq:e})")]
    AlreadyAtSep { distance_sq: f64 },
    #[error("root finder did not converge after {sweeps} sweeps (worst residual {worst_residual:e})")]
    RootNonConvergence { sweeps: usize, worst_residual: f64 },
    #[error("evaluation at a pole of the approximant (tau = {0})")]
    PoleHit(f64),
    #[error("trajectory blew up at t = {0} s")]
    Blowup(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
