//! Sampling-based simulation of random-unitary quantum channels.
//!
//! A random-unitary channel `E(ρ) = Σ p_i U_i ρ U_i†` is simulated by drawing
//! one unitary per shot from `{p_i}`, running the short circuit for that draw
//! on a classical state backend, and averaging the measured observable. The
//! exact references in [`oracles`] and the ancilla-based baseline in
//! [`ancilla`] exist to check that estimator.

pub mod error;
pub mod pauli;
pub mod rng;
pub mod engine;
pub mod channels;
pub mod oracles;
pub mod estimator;
pub mod ancilla;

pub use error::{Result, SimError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
