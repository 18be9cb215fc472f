//! Per-generation aggregates over all dyadic subcubes of a grid.

use super::dyadic::DyadicIndex;
use super::grid::GridFunction;

/// Aggregate of one per-cell quantity over every dyadic cube down to the
/// cell scale. `levels[g][idx.slot()]` holds the value of cube `idx`.
#[derive(Debug, Clone)]
pub struct Pyramid {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    /// Cell sums, combined child by child (always in slot order).
    pub fn sums(values: &[f64], n: usize, dim: usize) -> Self {
        Self::build(values, n, dim, |a, b| a + b)
    }

    pub fn maxima(values: &[f64], n: usize, dim: usize) -> Self {
        Self::build(values, n, dim, f64::max)
    }

    pub fn sums_of(f: &GridFunction) -> Self {
        Self::sums(f.samples(), f.n(), f.dim())
    }

    fn build(values: &[f64], n: usize, dim: usize, op: impl Fn(f64, f64) -> f64) -> Self {
        assert!(n.is_power_of_two());
        assert_eq!(values.len(), n.pow(dim as u32));
        let depth = n.trailing_zeros();
        let mut levels = vec![values.to_vec()];
        for g in (0..depth).rev() {
            let fine = levels.last().unwrap();
            let side = 1usize << g;
            let coarse = (0..DyadicIndex::count(g, dim))
                .map(|s| {
                    let (i, j) = (s % side, s / side);
                    let fs = 2 * side;
                    if dim == 1 {
                        op(fine[2 * i], fine[2 * i + 1])
                    } else {
                        let a = op(fine[2 * i + fs * 2 * j], fine[2 * i + 1 + fs * 2 * j]);
                        let b = op(
                            fine[2 * i + fs * (2 * j + 1)],
                            fine[2 * i + 1 + fs * (2 * j + 1)],
                        );
                        op(a, b)
                    }
                })
                .collect();
            levels.push(coarse);
        }
        levels.reverse();
        Self { dim, levels }
    }

    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, idx: &DyadicIndex) -> f64 {
        self.levels[idx.generation as usize][idx.slot()]
    }

    pub fn level(&self, g: u32) -> &[f64] {
        &self.levels[g as usize]
    }

    /// Number of cells inside a cube of generation `g`.
    pub fn cells_per_cube(&self, g: u32) -> usize {
        1usize << ((self.depth() - g) as usize * self.dim)
    }

    /// Level `g` of a sum pyramid divided by the cell count.
    pub fn averages(&self, g: u32) -> Vec<f64> {
        let c = self.cells_per_cube(g) as f64;
        self.level(g).iter().map(|v| v / c).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Cube, Extension};

    #[test]
    fn sums_match_direct_averages() {
        let f =
            GridFunction::from_fn(Cube::unit(2), 16, |x| (7.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let p = Pyramid::sums_of(&f);
        assert_eq!(p.depth(), 4);
        for g in 0..=4 {
            let avgs = p.averages(g);
            for idx in DyadicIndex::generation_iter(g, 2) {
                let r = f.cube().subcube(&idx);
                let direct = f.mean(&r, Extension::None).unwrap();
                assert!((avgs[idx.slot()] - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn maxima_pyramid() {
        let vals: Vec<f64> = (0..8).map(|i| ((i * 5) % 8) as f64).collect();
        let p = Pyramid::maxima(&vals, 8, 1);
        assert_eq!(p.level(0), &[7.0]);
        assert_eq!(p.level(1), &[7.0, 6.0]);
        assert_eq!(p.level(3), vals.as_slice());
    }
}
