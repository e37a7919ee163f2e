//! Wideband near-field localization for extremely large linear arrays.
//!
//! The crate covers the signal model of a symmetric uniform linear array
//! observed over OFDM subcarriers, a low-coherence polar dictionary with
//! bandwidth-aligned distance rings, SOMP-based sparse recovery, two MUSIC
//! baselines (narrowband near-field and wideband far-field) and the solvers
//! for the range boundaries where those baselines stop being accurate.
//!
//! With the default `parallel` feature, grid construction, dictionary
//! assembly, SOMP scoring, spectrum evaluation and boundary scans run on the
//! rayon thread pool. Disabling the feature gives a sequential build with
//! bit-identical results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundaries;
pub mod coherence;
pub mod dictionary;
pub mod error;
pub mod model;
pub mod par;
pub mod recovery;
pub mod subspace;

pub use error::{Error, Result};
pub use model::{
    ArrayConfig, SnapshotMatrix, SteeringVector, Target, WavefrontModel, WidebandConfig,
};
