//! Spectral boundary-integral simulator for two-dimensional deep-water
//! capillary waves in the tangent-angle / vortex-sheet-strength formulation,
//! with linear-theory diagnostics and a run/report layer.
//!
//! Module layout:
//! - [`spectral`]: periodic pseudospectral toolbox.
//! - [`singular`]: Birkhoff-Rott decomposition, commutators and curve kernels.
//! - [`dynamics`]: nonlinear state, derived fields, stepper and monitors.
//! - [`linear`]: exact linear propagator, invariant vector fields and gain norms.
//! - [`experiments`]: the reference numerical experiments.
//! - [`runner`]: configuration, campaigns and persistence.

// NaN must fail the `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linear;
pub mod runner;
pub mod singular;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
