//! Solver suite for the Ising problem (zero-field weighted Max-Cut):
//! closed-form depth-1 QAOA expectations, the recursive variable-elimination
//! solver, its reinforcement-learning enhancement, a classical RL baseline,
//! instance generation and hard-instance mining, exact solving, and the
//! plumbing to benchmark all of them reproducibly.

pub mod adam;
pub mod error;
pub mod graph;
pub mod instances;
pub mod policy;
pub mod qaoa;
pub mod rqaoa;
pub mod seeding;
pub mod trainer;

pub use error::{Error, Result};
