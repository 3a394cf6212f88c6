use thiserror::Error;

/// Errors surfaced by the simulation and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("timestep {dt:e} exceeds stability bound {limit:e}")]
    StabilityBound { dt: f64, limit: f64 },

    #[error("mode search did not converge for tau={tau} (potential violates its convexity bounds?)")]
    ModeSearch { tau: f64 },

    #[error("bracket expansion failed while inverting the elongation map at r={r}")]
    BracketExpansion { r: f64 },

    #[error("rejection sampler exceeded {0} iterations (broken convexity bounds?)")]
    RejectionOverrun(u64),

    #[error("quadrature did not reach the requested tolerance")]
    QuadratureStall,

    #[error("state became non-finite at t={t} (timestep too large?)")]
    NonFiniteState { t: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
