//! Numerical laboratory for the temporal continuity of diagonal state-space
//! models.
//!
//! The crate is organised bottom-up:
//!
//! - [`ssm`]: continuous S4/S6 systems, ZOH and bilinear discretization under
//!   an explicit refinement step, the discrete recursion and an RK4 reference
//!   solver.
//! - [`signals`]: random shifted-Chebyshev inputs, zero-order holds and
//!   Lipschitz estimates.
//! - [`dynsys`]: Van der Pol, damped harmonic, Ornstein-Uhlenbeck and forced
//!   Duffing trajectory generators.
//! - [`metric`]: the lag-similarity continuity score and the continuous /
//!   quantized token embedding.
//! - [`harness`]: error bounds and the refinement convergence study.
//! - [`stagewise`]: temporal subsampling, step-size schedules and a stage
//!   runner with a closed-form ridge trainer.
//! - [`cli`]: the `ssmlab` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod cli;
pub mod dynsys;
mod error;
pub mod fmt;
pub mod harness;
pub mod metric;
pub mod rng;
pub mod signals;
pub mod ssm;
pub mod stagewise;

pub use error::{Error, Result};
