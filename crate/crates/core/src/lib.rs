//! Exact models of simultaneous-message-passing (SMP) protocols.
//!
//! The crate evaluates SMP protocols by exact enumeration, measures their
//! information leakage, rewrites them through the compression, truncation
//! and derandomization transforms that connect leakage to communication,
//! and evaluates the finite-size lower bounds for the equality function
//! against a quantum fingerprinting leakage curve.
//!
//! Module map:
//!
//! * [`infotheory`]: finite distributions, entropies, mutual information,
//!   Blahut–Arimoto channel capacity.
//! * [`smp`]: protocols in the private, shared and average-length models,
//!   their output distributions, errors and costs, and the JSON format.
//! * [`leakage`]: information leakage and information complexity.
//! * [`transforms`]: channel-simulation compression, Markov truncation,
//!   Newman and Babai–Kimmel derandomization, and transform pipelines.
//! * [`bounds`]: closed-form bounds, the `(δ1, δ2)` optimizer, the quantum
//!   leakage curve and crossover search.
//! * [`suite`]: randomized identity checks used by `smpleak verify`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod coding;
mod error;
pub mod exec;
pub mod infotheory;
pub mod leakage;
pub mod smp;
pub mod suite;
pub mod transforms;

pub use error::{Error, Result};
pub use exec::Exec;
