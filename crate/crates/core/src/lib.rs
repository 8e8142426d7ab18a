//! Multi-attribute stochastic user equilibrium with logit assignment and
//! statistical inference of route-choice utility coefficients from link
//! traffic counts.
//!
//! The crate is organized around the estimation pipeline:
//!
//! - [`network`]: links with BPR performance functions, demand tables, path
//!   sets, incidence matrices and k-shortest-path generation.
//! - [`equilibrium`]: stochastic network loading and the SUE-logit solver
//!   (Frank-Wolfe grid line search or successive averages), plus column
//!   generation and path selection.
//! - [`estimation`]: the nonlinear least-squares objective on observed link
//!   counts, analytic first and second derivatives through the logit
//!   loading, normalized gradient descent, Levenberg-Marquardt, and the
//!   alternating bilevel loop.
//! - [`inference`]: error variance, coefficient covariance, t-tests,
//!   confidence intervals, F-tests and fit indicators.
//! - [`synthetic`]: builtin benchmark networks, the synthetic count
//!   generator and the seeded Monte Carlo harness.
//! - [`io`]: TNTP/CSV parsing and CSV export.

pub mod equilibrium;
pub mod error;
pub mod estimation;
pub mod inference;
pub mod io;
pub mod network;
pub mod synthetic;

pub use error::{Error, Result};
