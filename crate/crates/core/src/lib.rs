//! Sparse solutions to least-squares problems of arbitrary shape.
//!
//! Given `A` (m×n), `b` (length m) and a target rank `k`, the solvers here
//! pick a small, rescaled subset of the columns of `A` and solve the
//! least-squares problem restricted to them. The resulting vector has at most
//! `r` nonzeros and its residual is provably close to the residual of the
//! rank-`k` truncated-SVD solution.
//!
//! Two column selectors are provided:
//!
//! * [`sampling::deterministic_sampling`], a greedy dual-set barrier method that
//!   simultaneously keeps the sampled right singular vectors well conditioned
//!   and the sampled residual small;
//! * [`sampling::random_sampling`], i.i.d. leverage-score sampling.
//!
//! [`bounds`] evaluates both sides of every inequality these methods rely on,
//! so that a run can be checked rather than trusted.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > t)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
mod error;
pub mod linalg;
mod math;
mod matrix;
pub mod rng;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, Vector};

#[cfg(test)]
mod testutil;
