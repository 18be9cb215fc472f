//! Dyadic cube geometry and cell-center grids.

mod cube;
mod dyadic;
mod grid;
mod pyramid;

pub use cube::{dilate, dyadic_cubes, reflect_point, Cube, Point, MAX_DIM};
pub use dyadic::DyadicIndex;
pub(crate) use grid::pow;
pub use grid::{fold, CellBox, Extension, GridFunction};
pub use pyramid::Pyramid;
