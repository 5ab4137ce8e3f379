//! Multidimensional continued fraction algorithms as fibred systems of
//! integer matrices acting projectively on ℝⁿ.
//!
//! [`systems`] holds the algorithms and their duals, [`measure`] the
//! Monte Carlo machinery for invariant densities and cylinder measures, and
//! [`duality`] the intertwiner checks. [`figure`] draws the cylinder
//! partitions in the plane.

pub mod duality;
pub mod error;
pub mod figure;
pub mod measure;
pub mod perm;
pub mod polytope;
pub mod projlin;
pub mod systems;

pub use error::{Error, Result};
pub use perm::Permutation;
pub use projlin::{IntMatrix, ProjPoint};
pub use systems::{registry, Algorithm, CylinderSpec, Digit, FibredSystem, Side};
