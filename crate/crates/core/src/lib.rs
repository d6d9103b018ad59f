//! Spectral-Galerkin simulation of the Jordan–Moore–Gibson–Thompson (JMGT)
//! equation
//!
//! ```text
//! τ u_ttt + (1 − 2k u) u_tt + c² A u + (δ + τ c²) A u_t = 2k (u_t)²
//! ```
//!
//! and of its Westervelt limit (τ = 0) on 1D/2D rectangles with homogeneous
//! Dirichlet data, together with the energy functionals and decay/limit
//! diagnostics built on top of the solvers.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, the command line
//! and threading live in the `jmgt-lab` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diagnostics;
mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod picard;
pub mod propagator;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{EnergySample, JmgtState, ModelParams, NormLevel, WestState};
pub use spectral::{OperatorPower, PhysicalField, SpectralBasis, SpectralField, Transform};
