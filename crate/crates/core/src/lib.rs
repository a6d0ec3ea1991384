//! Coherent control of nonlinear absorption in four-level atoms.
//!
//! The crate computes rotating-frame steady states for ladder and Y-type
//! four-level schemes, propagates the driving fields through an atomic medium
//! in the quasi-static limit, and builds on that to produce probe spectra,
//! switching curves, ring-cavity bistability curves, Gaussian-pulse
//! transmission and saturable / reverse-saturable absorption curves.
//!
//! Everything is expressed in units of a reference decay rate γ.

pub mod atom;
pub mod cavity;
pub mod config;
pub mod error;
pub mod experiments;
pub mod parallel;
pub mod presets;
pub mod propagation;
pub mod pulse;
pub mod run;
pub mod steady;

pub use atom::{AtomicSystem, DensityMatrix, DriveSet, Scheme, C64};
pub use error::{Error, Result};
