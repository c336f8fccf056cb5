//! Contact force and torque estimation for vision-based tactile sensors.
//!
//! The pipeline turns a 2D marker-displacement field into a contact wrench:
//!
//! 1. [`ingest`]: track marker centroids frame to frame and interpolate the
//!    displacements onto a regular grid.
//! 2. [`nhhd`]: split the field into curl-free, divergence-free and harmonic
//!    parts with free-space Green's-function Poisson solves.
//! 3. [`features`]: reduce the parts to three scalars (normal, tangential,
//!    torsional response).
//! 4. [`calib`]: map the scalars to forces with RANSAC lines or small MLPs,
//!    and cross-validate against raw-field baselines.
//! 5. [`grasp`]: friction-cone checks, contact-phase classification and a
//!    band-keeping grasp-force controller running against a simulated plant.
//!
//! [`surrogate`] generates analytic displacement fields for programmable loads
//! and stands in for the physical sensor in tests and simulations.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calib;
mod error;
pub mod features;
pub mod field;
pub mod grasp;
pub mod ingest;
pub(crate) mod math;
pub mod nhhd;
pub mod surrogate;

pub use error::{Error, Result};
pub use features::{compute_features, FeatureTriple};
pub use field::{GridSpec, ScalarField2D, VectorField2D};
pub use nhhd::{decompose, Decomposition};
