//! Simulation of shaped phonon emission, delayed lossy transfer and capture
//! between two superconducting qubits coupled to a surface-acoustic-wave
//! channel, together with the tomography used to score the transfers.
//!
//! Units: time in ns, rates in 1/ns (energy) or rad/ns (angular frequency).
//! Linear frequencies given in MHz or GHz are converted at the boundary.

pub mod cascade;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod ioshape;
pub mod multimode;
pub mod qcore;
pub mod sawphys;
pub mod tomo;

pub use error::{Error, Result};
