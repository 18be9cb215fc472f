use serde::{Deserialize, Serialize};

use super::cube::{Cube, Point, MAX_DIM};
use super::dyadic::DyadicIndex;
use crate::error::{param, Error, Result};
use crate::sum::Neumaier;

/// How cells outside the grid's cube are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Any cell outside the cube is an error.
    None,
    /// Even-reflection periodic extension across every face.
    Reflect,
}

/// A block of whole cells: `len` cells per side starting at integer cell
/// coordinates `lo` (which may lie outside `[0, n)` for dilates).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellBox {
    pub lo: [i64; MAX_DIM],
    pub len: usize,
}

impl CellBox {
    pub fn cell_count(&self, dim: usize) -> usize {
        self.len.pow(dim as u32)
    }

    /// Same center, `3×` the side.
    pub fn triple(&self) -> CellBox {
        let l = self.len as i64;
        CellBox {
            lo: [self.lo[0] - l, self.lo[1] - l],
            len: 3 * self.len,
        }
    }

    fn inside(&self, n: usize, dim: usize) -> bool {
        (0..dim).all(|a| self.lo[a] >= 0 && self.lo[a] + self.len as i64 <= n as i64)
    }
}

/// Folds an (unbounded) cell coordinate back into `[0, n)` using the
/// even-reflection rule.
#[inline]
pub fn fold(m: i64, n: usize) -> usize {
    let n = n as i64;
    let y = m.rem_euclid(2 * n);
    (if y < n { y } else { 2 * n - 1 - y }) as usize
}

/// Real samples at the cell centers of a uniform `n^d` grid over a cube.
///
/// Cell `(i, j)` has linear index `i + n j` (axis 0 fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    cube: Cube,
    n: usize,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(cube: Cube, n: usize, samples: Vec<f64>) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(param(format!(
                "cells per side must be a power of two, got {n}"
            )));
        }
        let expected = n.pow(cube.dim() as u32);
        if samples.len() != expected {
            return Err(Error::GridMismatch(format!(
                "expected {expected} samples for n = {n}, d = {}, got {}",
                cube.dim(),
                samples.len()
            )));
        }
        Ok(Self { cube, n, samples })
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(cube: Cube, n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let probe = Self::new(cube, n, vec![0.0; n.pow(cube.dim() as u32)])?;
        let samples = (0..probe.len())
            .map(|i| f(&probe.cell_center(i)[..cube.dim()]))
            .collect();
        Ok(Self { samples, ..probe })
    }

    pub fn constant(cube: Cube, n: usize, c: f64) -> Result<Self> {
        Self::new(cube, n, vec![c; n.pow(cube.dim() as u32)])
    }

    pub fn cube(&self) -> &Cube {
        &self.cube
    }

    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Cell side length.
    pub fn h(&self) -> f64 {
        self.cube.side() / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim() as i32)
    }

    /// Deepest generation whose cubes are unions of cells.
    pub fn max_generation(&self) -> u32 {
        self.n.trailing_zeros()
    }

    pub fn cell_coords(&self, i: usize) -> [usize; MAX_DIM] {
        [i % self.n, i / self.n]
    }

    pub fn cell_index(&self, c: [usize; MAX_DIM]) -> usize {
        c[0] + self.n * c[1]
    }

    pub fn cell_center(&self, i: usize) -> Point {
        let c = self.cell_coords(i);
        let h = self.h();
        let mut x = [0.0; MAX_DIM];
        for (a, o) in self.cube.origin().iter().enumerate() {
            x[a] = o + (c[a] as f64 + 0.5) * h;
        }
        x
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            cube: self.cube,
            n: self.n,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            cube: self.cube,
            n: self.n,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.n != other.n || self.cube != other.cube {
            return Err(Error::GridMismatch(format!(
                "n = {} on {:?} vs n = {} on {:?}",
                self.n, self.cube, other.n, other.cube
            )));
        }
        Ok(())
    }

    /// Errors on the first sample that is not strictly positive.
    pub fn check_positive(&self) -> Result<()> {
        match self
            .samples
            .iter()
            .position(|&v| !(v > 0.0 && v.is_finite()))
        {
            Some(cell) => Err(Error::NonPositiveWeight {
                cell,
                value: self.samples[cell],
            }),
            None => Ok(()),
        }
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The cells covered by `r`, which must consist of whole grid cells.
    pub fn cell_box(&self, r: &Cube) -> Result<CellBox> {
        let misaligned = || Error::Alignment {
            origin: r.origin().to_vec(),
            side: r.side(),
        };
        if r.dim() != self.dim() {
            return Err(misaligned());
        }
        let h = self.h();
        let snap = |v: f64| -> Option<i64> {
            let k = (v / h).round();
            ((v / h - k).abs() <= 1e-9 * (1.0 + k.abs())).then_some(k as i64)
        };
        let len = snap(r.side()).filter(|&l| l >= 1).ok_or_else(misaligned)?;
        let mut lo = [0i64; MAX_DIM];
        for (a, l) in lo.iter_mut().enumerate().take(self.dim()) {
            *l = snap(r.origin()[a] - self.cube.origin()[a]).ok_or_else(misaligned)?;
        }
        Ok(CellBox {
            lo,
            len: len as usize,
        })
    }

    /// The cell block of a dyadic subcube, generation at most [`Self::max_generation`].
    pub fn dyadic_box(&self, idx: &DyadicIndex) -> CellBox {
        assert!(
            idx.generation <= self.max_generation(),
            "generation {} is finer than the grid",
            idx.generation
        );
        let len = self.n >> idx.generation;
        CellBox {
            lo: [
                idx.coords[0] as i64 * len as i64,
                idx.coords[1] as i64 * len as i64,
            ],
            len,
        }
    }

    /// Linear indices of the cells of `b`, folded through the extension.
    pub fn box_cells(&self, b: &CellBox, ext: Extension) -> Result<Vec<usize>> {
        if ext == Extension::None && !b.inside(self.n, self.dim()) {
            return Err(Error::Alignment {
                origin: (0..self.dim()).map(|a| b.lo[a] as f64 * self.h()).collect(),
                side: b.len as f64 * self.h(),
            });
        }
        let axis: Vec<usize> = (0..b.len as i64)
            .map(|k| fold(b.lo[0] + k, self.n))
            .collect();
        Ok(if self.dim() == 1 {
            axis
        } else {
            let rows: Vec<usize> = (0..b.len as i64)
                .map(|k| fold(b.lo[1] + k, self.n))
                .collect();
            rows.iter()
                .flat_map(|&j| axis.iter().map(move |&i| i + self.n * j))
                .collect()
        })
    }

    /// `⟨f⟩_{p,R} = (⟨|f|^p⟩_R)^{1/p}`; `p = ∞` gives the largest `|f|`.
    pub fn average(&self, r: &Cube, p: f64, ext: Extension) -> Result<f64> {
        if p < 1.0 || p.is_nan() {
            return Err(param(format!(
                "average exponent must lie in [1, ∞], got {p}"
            )));
        }
        let cells = self.box_cells(&self.cell_box(r)?, ext)?;
        Ok(self.average_cells(&cells, p))
    }

    pub(crate) fn average_cells(&self, cells: &[usize], p: f64) -> f64 {
        if p.is_infinite() {
            return cells
                .iter()
                .map(|&i| self.samples[i].abs())
                .fold(0.0, f64::max);
        }
        let mut acc = Neumaier::new();
        for &i in cells {
            acc.add(pow(self.samples[i].abs(), p));
        }
        pow(acc.value() / cells.len() as f64, 1.0 / p)
    }

    /// Signed mean `⟨f⟩_R`.
    pub fn mean(&self, r: &Cube, ext: Extension) -> Result<f64> {
        let cells = self.box_cells(&self.cell_box(r)?, ext)?;
        Ok(self.mean_cells(&cells))
    }

    pub(crate) fn mean_cells(&self, cells: &[usize]) -> f64 {
        let mut acc = Neumaier::new();
        for &i in cells {
            acc.add(self.samples[i]);
        }
        acc.value() / cells.len() as f64
    }

    /// Integral over the whole cube (midpoint rule).
    pub fn integral(&self) -> f64 {
        crate::sum::sum(self.samples.iter().copied()) * self.cell_volume()
    }

    /// Finite-difference partial derivatives: central in the interior,
    /// one-sided at boundary cells.
    pub fn gradient(&self) -> Vec<GridFunction> {
        let n = self.n;
        let h = self.h();
        (0..self.dim())
            .map(|axis| {
                let stride = if axis == 0 { 1 } else { n };
                let samples = (0..self.len())
                    .map(|i| {
                        if n < 2 {
                            return 0.0;
                        }
                        let k = self.cell_coords(i)[axis];
                        let f = &self.samples;
                        if k == 0 {
                            (f[i + stride] - f[i]) / h
                        } else if k == n - 1 {
                            (f[i] - f[i - stride]) / h
                        } else {
                            (f[i + stride] - f[i - stride]) / (2.0 * h)
                        }
                    })
                    .collect();
                GridFunction {
                    cube: self.cube,
                    n,
                    samples,
                }
            })
            .collect()
    }

    /// `|∇f|`, the Euclidean norm of [`Self::gradient`].
    pub fn gradient_magnitude(&self) -> GridFunction {
        let parts = self.gradient();
        let samples = (0..self.len())
            .map(|i| {
                parts
                    .iter()
                    .map(|g| g.samples[i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        GridFunction {
            cube: self.cube,
            n: self.n,
            samples,
        }
    }
}

/// `x^p` with exact fast paths for the common integer exponents.
#[inline]
pub(crate) fn pow(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else if p == 0.5 {
        x.sqrt()
    } else {
        x.powf(p)
    }
}
