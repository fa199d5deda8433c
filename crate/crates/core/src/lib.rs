//! Casimir-Lifshitz interaction between a dielectric sphere and a
//! concentric spherical cavity, at zero and finite temperature.
//!
//! * [`media`]: response functions at imaginary frequency and sign classes;
//! * [`specfun`]: modified spherical Bessel functions and their ratios;
//! * [`scattering`]: exterior/interior amplitudes and the variable-phase
//!   equation;
//! * [`energetics`]: energies, pressures, self-energy, planar limit;
//! * [`harness`]: randomized checks of the sign theorems.

pub mod energetics;
pub mod error;
pub mod harness;
pub mod media;
pub mod scattering;
pub mod specfun;
pub mod sum;

pub use error::{CasimirError, Result};
