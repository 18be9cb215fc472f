//! Numerical laboratory for two-weight fractional Poincaré–Sobolev inequalities
//! on dyadically discretized cubes.

pub mod error;
pub mod lattice;
pub mod norms;
pub mod sparse;
pub mod sum;
pub mod truncation;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
