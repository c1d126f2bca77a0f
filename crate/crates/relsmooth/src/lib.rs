//! Bregman-geometry first-order methods for relatively smooth convex
//! minimization: deterministic relative gradient descent, randomized
//! coordinate descent with short and ESO stepsizes, and relative stochastic
//! gradient descent, together with evaluators for the corresponding
//! convergence bounds and numerical verifiers for the defining inequalities.
//!
//! The `parallel` feature (on by default) runs independent replicates on a
//! rayon pool; without it the same API falls back to sequential execution.

// Parameter guards use `!(x > 0.0)` so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod bregman;
pub mod error;
pub mod io;
pub mod parallel;
pub mod presets;
pub mod problems;
pub mod sampling;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
