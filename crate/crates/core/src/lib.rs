//! Detection of faster-than-Nyquist (FTN) signaling by semidefinite relaxation.
//!
//! The crate is organised as a pipeline:
//!
//! * [`signal`] builds the discrete-time model (root-raised-cosine pulse, ISI
//!   taps, Gram matrix, whitening factor) and simulates received blocks.
//! * [`sdp`] is a dense primal-dual interior-point solver for small
//!   semidefinite programs.
//! * [`detect`] lifts the sequence-estimation problem into an SDP, solves it
//!   and rounds the solution by Gaussian randomization; an exhaustive search
//!   serves as the reference detector.
//! * [`experiments`] runs Monte-Carlo error-rate sweeps and the supporting
//!   numerical checks.

// `!(x > 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod detect;
pub mod error;
pub mod experiments;
pub mod quad;
pub mod sdp;
pub mod signal;

pub use config::{FtnConfig, Modulation};
pub use error::{Error, Result};
