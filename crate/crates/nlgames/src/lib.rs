//! Nonlocal multiplayer games at desk scale.
//!
//! This crate implements the machinery needed to experiment with
//! entangled-player games built from constraint-satisfaction problems:
//!
//! - exact prime-field and multivariate-polynomial arithmetic ([`field`],
//!   [`polyalg`]),
//! - the game abstraction with exact classical values and numerically exact
//!   quantum strategy evaluation ([`gamecore`]),
//! - referee samplers and acceptance checkers for the plane-vs-point
//!   low-degree test, its two-level composition, the 3-SAT test, the BLR
//!   linearity test and the QUADEQ test ([`protocols`]),
//! - the reduction pipeline that compiles a 3-SAT instance down to a
//!   three-player XOR game, including folding and Fourier decoding
//!   ([`reductions`]),
//! - small-Hilbert-space consistency metrics for sub-measurements
//!   ([`quantumlab`]) and the consolidation / bias semidefinite programs
//!   with a dense interior-point core ([`optim`]).
//!
//! Everything is deterministic given a seed: randomness flows through named
//! counter-based streams (see [`rng`]).

pub mod error;
pub mod field;
pub mod formats;
pub mod gamecore;
pub mod linalg;
pub mod optim;
pub mod polyalg;
pub mod protocols;
pub mod quantumlab;
pub mod reductions;
pub mod rng;

pub use error::Error;
