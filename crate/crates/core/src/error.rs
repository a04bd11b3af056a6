use thiserror::Error;

/// Errors raised by the model, integrator, shooting and singular-limit layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("flux is not strictly convex on [{lo}, {hi}]: f''({at}) = {value:e}")]
    NonConvexFlux {
        lo: f64,
        hi: f64,
        at: f64,
        value: f64,
    },

    #[error("invalid flux: {0}")]
    InvalidFlux(String),

    #[error("u_minus ({u_minus}) must be strictly greater than u_plus ({u_plus})")]
    BadInterval { u_minus: f64, u_plus: f64 },

    #[error("alpha must be non-negative, got {0}")]
    NegativeAlpha(f64),

    #[error("v = {v} lies outside [{lo}, {hi}]")]
    OutOfInterval { v: f64, lo: f64, hi: f64 },

    #[error("alpha must be at least 1/2 here, got {0}")]
    AlphaBelowHalf(f64),

    #[error("delta must be strictly positive, got {0}")]
    ZeroDelta(f64),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite state (v = {v}, w = {w}) at t = {t}")]
    NonFiniteState { t: f64, v: f64, w: f64 },

    #[error("no monotone shot found up to epsilon = {upper} (delta = {delta})")]
    BracketFailure { delta: f64, upper: f64 },

    #[error(
        "epsilon = {epsilon} is below eps_star = {eps_star}; the singular profile is not real"
    )]
    RadicandNegative { epsilon: f64, eps_star: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
