//! Spectral Galerkin solver for time-harmonic elastic scattering by open
//! arcs in the plane.

pub mod assembly;
pub mod chebyshev;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod potentials;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
