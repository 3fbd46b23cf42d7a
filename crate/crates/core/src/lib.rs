//! History-operator simulation of finite-dimensional quantum experiments.
//!
//! A [`Schedule`](experiment::Schedule) describes an experiment: an initial
//! state, a sequence of slots (a unitary step followed by a frame of
//! measurement alternatives, optionally with a recorded outcome) and an
//! optional post-selected final state. From it the engine builds chain
//! operators, the history operator, and every probability derived from them.

pub mod collapse;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod histories;
pub mod linalg;
pub mod operators;
pub mod pathint;
pub mod probability;
pub mod scenario;

pub use error::{Error, Result};
pub use exec::Execution;

/// Absolute entry-wise tolerance for matrix comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Tolerance on the norm of input states.
pub const TOL_NORM: f64 = 1e-9;
/// Chains with weight at or below this are left out of history content.
pub const PRUNE_TOL: f64 = 1e-12;
/// Largest number of histories the engine will enumerate.
pub const HISTORY_BUDGET: u64 = 1_000_000;
