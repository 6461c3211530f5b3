//! Simulation of heralded noiseless linear amplification (quantum scissors)
//! for single-rail entanglement distribution over lossy channels.
//!
//! The crate is layered bottom-up:
//!
//! - [`fock`]: truncated multimode Fock spaces, beam splitters, loss, POVMs,
//!   fidelity.
//! - [`devices`]: lossy single-photon sources and click / photon-number
//!   resolving detectors with dark counts.
//! - [`protocols`]: amplifier at the receiver, amplifier at the channel
//!   midpoint, and direct transmission.
//! - [`analysis`]: gain settings, fibre-distance conversion, sweeps, scaling
//!   fits, gain tuning, crossover search and a Monte-Carlo cross-check.

pub mod analysis;
pub mod devices;
mod error;
pub mod fock;
pub mod protocols;

pub use error::{Error, Result};
