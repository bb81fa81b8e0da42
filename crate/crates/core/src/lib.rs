//! Simulation of polarization-qubit storage in birefringent, anisotropically
//! absorbing quantum memories.
//!
//! * [`jones`]: Jones vectors and matrices, PDL/PMD factors, polar decomposition.
//! * [`medium`]: crystals, compensated two-crystal stacks, layered propagation.
//! * [`afc`]: atomic-frequency-comb echo amplitudes and efficiencies.
//! * [`tomography`]: simulated coincidence counts, maximum-likelihood
//!   reconstruction, fidelity and Monte-Carlo error bars.
//! * [`photon_stats`]: two-mode squeezed state correlation functions.
//! * [`experiment`]: configuration, reproduction runs and CSV reports used by
//!   the `polmem` binary.

pub mod afc;
pub mod error;
pub mod experiment;
pub mod jones;
pub mod medium;
pub mod photon_stats;
pub mod tomography;

pub use error::{Error, Result};
