//! Multi-target detection with an RIS-aided MIMO radar.
//!
//! The crate covers the whole pipeline: deterministic channel synthesis for a
//! planar reflecting surface next to a small antenna array, a cycle-based
//! Bayesian multiple-hypothesis detector, the relative-entropy design
//! objective in its three algebraic forms, a dense complex SDP solver, and the
//! alternating waveform / phase-shift optimizer (WPSO) that drives each cycle.
//! [`sim`] ties these together into a seeded Monte Carlo harness.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod hypothesis;
pub mod linalg;
pub mod objective;
pub mod sdp;
pub mod signal;
pub mod sim;
pub mod verify;
pub mod wpso;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
