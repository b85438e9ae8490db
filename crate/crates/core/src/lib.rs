//! Real-state quantum cloning machines in dimension `d`.
//!
//! The crate covers the whole pipeline for symmetric 1 → 2 cloners that act
//! equally on every real pure state:
//!
//! * [`space`]: real unit vectors, complement frames, Haar rotations and bases.
//! * [`tensor`]: the two-clone output density matrix in its κ form and its
//!   spectral form, clone marginals and the single-clone fidelity.
//! * [`constraints`]: positivity, trace, no-signaling, covariance and
//!   clone-swap checks.
//! * [`bound`]: closed-form fidelity bounds and the per-case candidate terms.
//! * [`optimize`]: an independent multi-start numerical maximization of the
//!   fidelity under the same constraints.
//! * [`cloner`]: the explicit cloner built from the `(A, C)` amplitudes.
//! * [`family`] and [`verify`]: runtime registries for the cloner families
//!   and for the verification checks used by the CLI.

pub mod bound;
pub mod cloner;
pub mod constraints;
pub mod error;
pub mod family;
pub mod optimize;
pub mod rng;
pub mod space;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};

/// Tolerance for quantities that are exact in closed form.
pub const ANALYTIC_TOL: f64 = 1e-9;
/// Tolerance for results that pass through a dense eigensolver or a long
/// chain of matrix products.
pub const EIG_TOL: f64 = 1e-8;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;
/// Smallest spectral parameter accepted as non-negative on the spectral path.
pub const SPECTRAL_PSD_TOL: f64 = -1e-12;
/// Tolerance on numerical optimization results.
pub const OPT_TOL: f64 = 1e-6;
/// Default cap on the dimension `d`.
pub const DEFAULT_MAX_DIM: usize = 32;
