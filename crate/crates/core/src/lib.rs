//! Noise model, entanglement metrics and simulated tomography for a
//! quantum-dot photon source that turns consecutive single photons into
//! post-selected polarization-entangled pairs with an unbalanced
//! Mach-Zehnder interferometer.

pub mod cli;
pub mod ent_metrics;
pub mod error;
pub mod fock_oracle;
pub mod photon_stats;
pub mod source_model;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
