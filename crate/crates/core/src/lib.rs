//! Finite-rank (Ulam) approximations of transfer operators for expanding
//! interval maps with a neutral fixed point at the origin.
//!
//! The crate is organised bottom-up:
//!
//! - [`interval_maps`]: piecewise-monotone maps of `[0, 1]`, the
//!   Manneville–Pomeau family, a non-convergence counterexample, branch
//!   inversion and hypothesis checkers.
//! - [`partitions`]: interval partitions of `[0, 1]` (uniform and
//!   quasi-uniform with bounded cell-length ratio).
//! - [`measures`]: monotonic measures in normal form (atom at zero plus a
//!   non-increasing step density), projection and push-forward.
//! - [`ulam_operator`]: the sparse row-stochastic transition matrix of the
//!   discretized transfer operator.
//! - [`stationary`]: stationary distributions, unique-ergodicity checks and
//!   the discrete SRB approximant.
//! - [`experiments`]: resolution sweeps, scaling fits and the counterexample
//!   scenario.
//! - [`cli`]: the `ulam` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod interval;
pub mod interval_maps;
pub mod measures;
pub mod partitions;
pub mod roots;
pub mod stationary;
pub mod ulam_operator;

pub use error::{Error, Result};
pub use interval::Interval;
pub use interval_maps::{counterexample_map, mp_map, Branch, IntervalMap};
pub use measures::StepMeasure;
pub use partitions::Partition;
pub use stationary::{stationary_distribution, DiscreteSrb, SolverOptions, StationaryResult};
pub use ulam_operator::UlamMatrix;
