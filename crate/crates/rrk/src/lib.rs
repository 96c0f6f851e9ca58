//! Relaxation Runge-Kutta time integration with per-element entropy control,
//! on top of entropy-conservative/entropy-stable discontinuous collocation
//! semidiscretizations of the compressible Euler equations.
//!
//! The crate provides
//!
//! - a registry of explicit Runge-Kutta tableaus with rooted-tree order
//!   verification ([`tableaux`]),
//! - a generic stepper producing stagewise entropy estimates and embedded
//!   error estimates ([`integrator`]),
//! - global and per-partition relaxation of accepted steps ([`relaxation`]),
//! - Legendre-Gauss-Lobatto collocation operators and entropy-stable
//!   flux-differencing right-hand sides in 1D/2D ([`euler`]),
//! - a library of benchmark problems wired to the [`ode::OdeSystem`]
//!   contract ([`problems`]).

// negated comparisons reject NaN alongside the sign check; index loops are
// the clearest form for the small dense kernels here
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod euler;
pub mod integrator;
pub mod ode;
pub mod problems;
pub mod relaxation;
pub mod roots;
pub mod tableaux;

pub use error::{Error, Result};
