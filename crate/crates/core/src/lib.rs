//! Lower-bound fidelity estimation for 1D and 2D cluster states.
//!
//! The crate builds cluster-state lattices and their stabilizer generators,
//! evaluates a family of fidelity lower-bound witnesses syndrome-wise,
//! samples Pauli noise at Monte Carlo scale, compiles each witness into
//! single-qubit measurement settings, simulates shot records with a
//! stabilizer tableau, and cross-checks everything against dense
//! brute-force oracles at desk scale.

pub mod analytics;
pub mod compiler;
pub mod error;
pub mod lattice;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod rng;
pub mod syndrome;
pub mod tableau;

pub use error::{Error, Result};
pub use lattice::{ClusterGraph, ClusterKind, QubitClass};
pub use noise::{KrausChannel, PauliErrorModel, SyndromeSample};
pub use pauli::{Pauli, PauliString, Phase};
pub use syndrome::{BoundEstimate, BoundId};
