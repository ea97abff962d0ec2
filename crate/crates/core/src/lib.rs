//! Numerical toolkit for the probabilistic simulation of quantum channels
//! backwards in time.
//!
//! The library computes, for a given channel, the maximum probability `p`
//! with which a generalized teleportation circuit (one joint preparation of
//! output + ancilla, followed later by one joint measurement on input +
//! ancilla) reproduces the channel from the future to the past. It also
//! constructs explicit protocols achieving that probability and verifies
//! them algebraically and by Monte Carlo sampling.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, tensor tools
//! - [`symmetric`]: symmetric-subspace projectors, bases, permutations
//! - [`channels`]: channel catalog and Choi operators
//! - [`causality`]: the operator inequality `p C <= rho0 (x) I` and its solvers
//! - [`protocol`]: resource state + POVM realization and simulation
//! - [`infogame`]: communication-game payoff bounds
//! - [`verify`]: named invariant batteries for the CLI harness

pub mod causality;
pub mod channels;
pub mod error;
pub mod infogame;
pub mod linalg;
pub mod protocol;
pub mod symmetric;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};

/// Library version reported in machine-readable result records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
