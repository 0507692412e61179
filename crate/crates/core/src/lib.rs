//! Quantum bootstrap sampling for approximate query processing.
//!
//! The crate builds and simulates the circuits that turn a sample of query
//! tuple results into bootstrap replications:
//!
//! - [`qcore`]: circuit representation and exact statevector simulation with
//!   seeded shot sampling.
//! - [`qram`]: X/MCX lookup tables mapping an address register to data
//!   qubits, and the resampler (Hadamard layer + lookup).
//! - [`qcounter`]: the MCX-cascade popcount counter and a MAJ/UMA
//!   ripple-carry adder.
//! - [`qbs`]: replication drivers (sequential, parallel, classical oracle).
//! - [`aqp`]: table ingestion, sampling, predicate evaluation, estimators,
//!   bootstrap standard error and confidence intervals.
//!
//! Bit ordering is uniform across the crate: qubit 0 is the least
//! significant bit of every basis index. Rendered bitstrings print the
//! highest qubit first.
//!
//! Randomness comes from `ChaCha8Rng` (seeded through
//! `SeedableRng::seed_from_u64`), with child seeds derived by
//! [`rng::derive_seed`], so every count is reproducible across platforms.

pub mod aqp;
pub mod error;
pub mod qbs;
pub mod qcore;
pub mod qcounter;
pub mod qram;
pub mod rng;
pub mod selfcheck;
pub mod stats;

pub use error::{Error, Result};

/// Crate version, embedded in every CLI report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
