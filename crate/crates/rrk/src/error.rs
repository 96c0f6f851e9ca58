use thiserror::Error;

/// Errors produced by the solver kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown tableau `{name}` (valid: {valid})")]
    UnknownTableau { name: String, valid: &'static str },

    #[error("unknown problem `{name}` (valid: {valid})")]
    UnknownProblem { name: String, valid: &'static str },

    #[error("invalid tableau `{name}`: {reason}")]
    InvalidTableau { name: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at t = {t} in partition {partition}")]
    NonFinite { t: f64, partition: usize },

    #[error("nonpositive {quantity} = {value} in element {element}, node {node}")]
    Positivity {
        quantity: &'static str,
        value: f64,
        element: usize,
        node: usize,
    },

    #[error(
        "no sign change for the relaxation residual in partition {kappa}: \
         r({lo}) = {r_lo}, r({hi}) = {r_hi}"
    )]
    Bracketing {
        kappa: usize,
        lo: f64,
        hi: f64,
        r_lo: f64,
        r_hi: f64,
    },

    #[error("relaxation root gamma = {gamma} in partition {kappa} at or below the floor {floor}")]
    DegenerateRoot { kappa: usize, gamma: f64, floor: f64 },

    #[error("residual |r| = {residual} after the root solve in partition {kappa} exceeds {tol}")]
    ResidualTooLarge { kappa: usize, residual: f64, tol: f64 },

    #[error(
        "local entropy inequality violated in partition {kappa}: \
         eta(u_gamma) = {lhs} exceeds the bound {rhs}"
    )]
    EntropyViolation { kappa: usize, lhs: f64, rhs: f64 },

    #[error("step limit {max_steps} exceeded at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
