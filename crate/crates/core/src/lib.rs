//! Locally statistical active-contour segmentation for images corrupted by
//! multiplicative Gamma (speckle) noise.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the numerical
//! substrate ([`grid`]), the variational model terms ([`model`]), four
//! interchangeable solvers ([`solvers`]), a speckle and phantom simulator
//! ([`speckle`]) and the evaluation metrics ([`metrics`]). Image files,
//! timing and the command-line front end live in the companion `sarseg`
//! crate.
//!
//! ```
//! use sarseg_core::speckle::{make_phantom, Geometry, SpeckleSpec};
//! use sarseg_core::solvers::{segment, Algorithm, SolverConfig};
//!
//! let phantom = make_phantom((48, 48), 200.0, 50.0, Geometry::Disk, None).unwrap();
//! let cfg = SolverConfig::standard(Algorithm::Fprd1);
//! let seg = segment(&phantom.noisy, &cfg).unwrap();
//! assert_eq!(seg.mask, phantom.mask);
//! ```

#![no_std]

extern crate alloc;

mod error;
mod field;

pub mod grid;
pub mod metrics;
pub mod model;
pub mod solvers;
pub mod speckle;

pub use error::{Error, Result};
pub use field::{Axis, Mask, ScalarField};
