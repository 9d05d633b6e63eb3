//! Exact combinatorics of fine saturated monoids, rational cones, cone
//! complexes and toric vector bundles.

pub mod budget;
pub mod checks;
pub mod bundle;
pub mod complex;
pub mod cone;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod monoid;
pub mod morphism;
pub mod polyhedron;

pub use error::{Error, Result};
