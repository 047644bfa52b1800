//! Simulation toolkit for the quantum kicked top on `n` spin-1/2 particles.
//!
//! Modules, bottom to top:
//! - [`spin`]: coherent and Dicke states, collective operators, basis embeddings.
//! - [`floquet`]: the Floquet step on the Dicke and register backends.
//! - [`metrics`]: entropy, purity, fidelity, Pauli correlations, ergodicity overlap.
//! - [`classical`]: the classical map on the unit sphere.
//! - [`open_system`]: decoherence channels, tomography simulation and MLE.
//! - [`experiments`]: scripted scans producing entropy maps and tables.

pub mod classical;
pub mod error;
pub mod experiments;
pub mod floquet;
pub mod linalg;
pub mod metrics;
pub mod open_system;
pub mod spin;

pub use error::{Error, Result};
pub use floquet::{FloquetParameters, FloquetState, Trajectory};
pub use metrics::{AverageWindow, OverlapSeries, PauliCorrelations};
pub use spin::{
    Basis, BlochVector, DensityOperator, DickeVector, RegisterVector, SphericalDirection, Spin,
};

/// Version string embedded in every output file.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
