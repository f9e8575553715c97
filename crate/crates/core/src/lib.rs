//! Link-level simulation of index-modulation information harvesting over
//! far-field multitone wireless power transfer.
//!
//! The crate is organised bottom-up:
//!
//! - [`codebook`]: index-modulation codebooks (SSK through GQSM) and spectral efficiency.
//! - [`channel`]: Rayleigh channel tensors, path loss and receiver noise.
//! - [`waveform`]: power split, artificial noise in the legitimate nullspace,
//!   baseband reception and passband synthesis at the energy harvester.
//! - [`detection`]: exhaustive maximum-likelihood detection.
//! - [`harvester`]: rectenna output model and the `z_DC` harvesting metric.
//! - [`error_rate`]: conditional/average pairwise error probabilities and the union bound.
//! - [`secrecy`]: discrete-input mutual information and ergodic secrecy rate.
//! - [`harness`]: configuration, seeded parallel sweeps, CSV output and the validation suite.

pub mod channel;
pub mod codebook;
pub mod detection;
pub mod error;
pub mod error_rate;
pub mod harness;
pub mod harvester;
pub mod linalg;
pub mod qam;
pub mod secrecy;
pub mod stream;
pub mod waveform;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
