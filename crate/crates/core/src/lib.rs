//! Nonparametric empirical-Bayes estimation for Gaussian location mixtures.
//!
//! The model is `X = mu + Z` with `Z ~ N(0, sigma^2)` and `mu` drawn from an
//! unknown mixing distribution `F`. This crate estimates `F` by maximum
//! likelihood over distributions supported on an equally spaced grid between
//! the data extremes (a convex problem in the grid weights), certifies the
//! solution with the first-order optimality condition, and builds on the
//! fitted prior:
//!
//! - [`density`] — Gaussian and discrete-mixture densities in the log domain,
//!   Simpson quadrature, Hellinger distance.
//! - [`npmle`] — the grid solver: likelihood matrix, monotone fixed-point
//!   iteration, optimality certificate.
//! - [`posterior`] — posterior laws, predictive densities, and posterior
//!   means under a fitted discrete prior.
//! - [`classify`] — the two-group empirical-Bayes classifier plus naive
//!   Bayes, thresholded naive Bayes, kernel/Tweedie shrinkage, lasso
//!   discriminant, and correlation screening.
//! - [`sim`] — seeded synthetic-data experiments: classifier comparisons and
//!   the Hellinger convergence-rate check.
//!
//! The crate is `no_std` (with `alloc`); all operations are pure functions
//! over immutable inputs and safe to call concurrently.

#![cfg_attr(not(test), no_std)]
// Negated comparisons are deliberate: `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

extern crate alloc;

use alloc::vec::Vec;

pub mod classify;
pub mod density;
pub mod math;
pub mod matrix;
pub mod npmle;
pub mod posterior;
pub mod rng;
pub mod sim;

pub use classify::{ClassifierModel, GroupSummary, LabeledDataset};
pub use density::MixingDistribution;
pub use matrix::Matrix;
pub use npmle::{NpmleFit, ObservationSet, SolveOptions};

/// Errors shared by the numeric modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(&'static str),

    #[error("numeric failure: {0}")]
    NumericFailure(&'static str),

    /// Coordinate descent ran out of iterations; carries the last iterate.
    #[error("lasso did not converge within {max_iters} cycles")]
    LassoNonConvergence {
        max_iters: usize,
        beta: Vec<f64>,
        beta0: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
