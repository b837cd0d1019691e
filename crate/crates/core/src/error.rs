//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("extrapolation parameters violate alpha + beta < 1: alpha={alpha}, beta={beta}")]
    SumBoundViolation { alpha: f64, beta: f64 },

    #[error("subproblem solver failed: {0}")]
    SubproblemFailure(String),

    #[error("backtracking did not satisfy the decrease test after {0} stepsize increases")]
    BacktrackDivergence(usize),

    #[error("objective increased at iteration {k}: {from} -> {to}")]
    NonDescent { k: usize, from: f64, to: f64 },

    #[error("trace was recorded without iterate retention")]
    MissingHatPoints,

    #[error("descent modulus must be positive, got {0}")]
    InvalidModulus(f64),

    #[error("problem does not expose the coupling gradient oracle")]
    MissingOracle,

    #[error("unsupported Bregman generator for this subproblem: {0}")]
    UnsupportedGenerator(String),

    #[error("bisection failed to bracket the constraint multiplier")]
    BisectionFailure,

    #[error("grid budget exceeded: {points} points over the {max} limit")]
    BudgetExceeded { points: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
