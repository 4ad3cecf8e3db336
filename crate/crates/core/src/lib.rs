//! Curves of constant geodesic curvature on charted surfaces.
//!
//! The crate covers the numerical side of min-max constructions for the functional
//! `A^c(region) = length(boundary) - c * area(region)`: surface models, discrete curves
//! and regions with their variations, curve shortening procedures, sweepouts and
//! surgeries, and the closed-form comparison criteria.

pub mod checks;
pub mod criteria;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod io;
pub mod minmax;
pub mod shortening;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
