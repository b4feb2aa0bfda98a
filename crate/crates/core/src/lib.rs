//! Uniform-grid spectral numerics for Hardy-type spaces on the circle and the
//! bi-torus.
//!
//! The crate builds, on a discretized probability space, the analytic cut-off
//! functions `Φ = (1 + w)^{-γ}`, the weak-L¹ splitting of annihilator elements
//! they enable, and the duality-side decomposition `f = g₁ + h₁` that witnesses
//! K-closedness of `(C^⊥ + D^⊥, C^{⊥,q} + D^{⊥,q})` in `(L¹, L^q)`.
//!
//! Everything here is pure: no IO, no global state, no threads. The `kclose`
//! companion crate adds file formats, corpus generation and the CLI.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cutoff;
pub mod direct;
mod error;
mod fft;
pub mod grid;
pub mod kclose;
pub mod metrics;
pub mod operators;
pub mod settings;
pub mod splitter;

pub use cutoff::{build_cutoff, CutoffParams, CutoffResult, Smoothing};
pub use error::{Error, Result};
pub use grid::{GridDomain, GridFunction, Pointwise, Spectrum};
pub use kclose::{
    decompose, verify_report, Degenerate, DecomposeOptions, DecompositionReport, DualDecompositionInput, Verification,
};
pub use metrics::{lp_norm, weak_l1, DistributionFunction};
pub use num_complex::Complex64;
pub use operators::{Axis, Side};
pub use settings::{Annihilator, InnerFunction, Setting, Space};
pub use splitter::{split, truncate, SplitResult};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
