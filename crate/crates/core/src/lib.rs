//! Stationary laws of the ancestral recombination graph (ARG) and of its
//! continuum extension, the partitioning process on `[0, R)`.
//!
//! * [`partitions`]: set partitions of loci, interval partitions, the metric `d`.
//! * [`exactarg`]: the ARG generator, exact stationary and transient laws,
//!   hitting probabilities.
//! * [`scenario`]: coalescence scenarios and the high-recombination
//!   approximation `F(pi) / rho^k`.
//! * [`simulate`]: event-driven simulation of the ARG and of the interval
//!   partitioning process.
//! * [`thetainfty`]: the limit point process of IBD-to-0 mass and its moments.
//! * [`moran`]: the forward Moran model with recombination and its ARG dual.
//! * [`stats`]: KS test, moments, occupancy fractions.
//! * [`validate`]: the acceptance suite.
//! * [`cli`]: the `arg-ibd` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exactarg;
pub mod moran;
pub mod partitions;
pub mod scenario;
pub mod simulate;
pub mod stats;
pub mod thetainfty;
pub mod validate;

pub use error::{Error, Result};
