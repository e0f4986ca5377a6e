//! Numerical certificates for the permutation-conjugated span of irreducible
//! SO(3) actions, together with the Monte Carlo machinery used to probe the
//! probabilistic consequences (isotropic spherical fields, radial/angular
//! independence, Gaussian characterizations).
//!
//! Module map:
//!
//! - [`lie_core`]: dense linear algebra on so(n)
//! - [`so3_irreps`]: real irreducible representations of SO(3)
//! - [`invariance_engine`]: the span W, the V1/V2 split of so(n), characters
//! - [`sphere_harmonics`]: real spherical harmonics and random fields on S²
//! - [`monte_carlo_stats`]: Haar sampling and permutation / Monte Carlo tests

pub mod error;
pub mod invariance_engine;
pub mod lie_core;
pub mod monte_carlo_stats;
pub mod rng;
pub mod so3_irreps;
pub mod sphere_harmonics;

pub use error::{Error, Result};
