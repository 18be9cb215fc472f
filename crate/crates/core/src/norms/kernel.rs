//! Pair weights for the singular kernel `|x − y|^{−d−sr}` on a cell grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{fold, CellBox, Extension, GridFunction};
use crate::sum::Neumaier;

/// How the kernel is integrated over a cell pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Quadrature {
    /// Kernel sampled at the two cell centers; same-cell pairs dropped.
    Midpoint,
    /// Kernel integrated over the partner cell with the difference quotient
    /// frozen at the centers; the same-cell contribution uses the local
    /// gradient. Exact for affine functions in 1D.
    #[default]
    CellIntegrated,
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// `∫` of `|y|^{a−2}` over the unit cell centered at `(kx, ky)`.
fn cell_integral_2d(kx: usize, ky: usize, a: f64) -> f64 {
    let m = if kx.max(ky) <= 3 { 16 } else { 1 };
    let sub = 1.0 / m as f64;
    let mut acc = Neumaier::new();
    for bi in 0..m {
        for bj in 0..m {
            let cx = kx as f64 - 0.5 + (bi as f64 + 0.5) * sub;
            let cy = ky as f64 - 0.5 + (bj as f64 + 0.5) * sub;
            for (xi, wi) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                for (yj, wj) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                    let x = cx + 0.5 * sub * xi;
                    let y = cy + 0.5 * sub * yj;
                    acc.add(wi * wj * x.hypot(y).powf(a - 2.0));
                }
            }
        }
    }
    acc.value() * 0.25 * sub * sub
}

/// Precomputed pair coefficients for one `(grid, r, s)` combination.
///
/// An off-diagonal pair at cell offset `k` contributes `|f(x) − f(y)|^r · c_k`
/// to the inner integral.
#[derive(Debug, Clone)]
pub struct PairKernel {
    dim: usize,
    n: usize,
    h: f64,
    r: f64,
    a: f64,
    quad: Quadrature,
    radius: usize,
    coef: Vec<f64>,
    /// 1D: `∫_{|z|<h/2} |z|^{a−1}`; unused in 2D.
    diag_1d: f64,
    /// 2D polar rule for the same-cell integral: `(cos θ, sin θ, weight)`.
    angles: Vec<(f64, f64, f64)>,
}

impl PairKernel {
    pub fn new(f: &GridFunction, r: f64, s: f64, quad: Quadrature) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Parameter(format!(
                "smoothness must satisfy 0 < s < 1, got {s}"
            )));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::Parameter(format!("requires r ≥ 1, got {r}")));
        }
        let dim = f.dim();
        let n = f.n();
        let h = f.h();
        let radius = 2 * n;
        let a = r * (1.0 - s);
        let stride = radius + 1;
        let mut coef = vec![0.0; stride.pow(dim as u32)];
        let ky_max = if dim == 1 { 0 } else { radius };
        for ky in 0..=ky_max {
            for kx in 0..=radius {
                if kx == 0 && ky == 0 {
                    continue;
                }
                let dist = (kx as f64).hypot(ky as f64) * h;
                coef[kx + stride * ky] = match (quad, dim) {
                    (Quadrature::Midpoint, _) => {
                        h.powi(dim as i32) * dist.powf(-(dim as f64) - s * r)
                    }
                    (Quadrature::CellIntegrated, 1) => {
                        let k = kx as f64;
                        h.powf(a) * ((k + 0.5).powf(a) - (k - 0.5).powf(a)) / a / dist.powf(r)
                    }
                    (Quadrature::CellIntegrated, _) => {
                        h.powf(a) * cell_integral_2d(kx, ky, a) / dist.powf(r)
                    }
                };
            }
        }
        let diag_1d = 2.0 * (0.5 * h).powf(a) / a;
        let angles = if dim == 2 {
            let m = 360;
            let dt = 2.0 * PI / m as f64;
            (0..m)
                .map(|i| {
                    let t = (i as f64 + 0.5) * dt;
                    let (sn, cs) = t.sin_cos();
                    let reach = 0.5 * h / cs.abs().max(sn.abs());
                    (cs, sn, dt * reach.powf(a) / a)
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            dim,
            n,
            h,
            r,
            a,
            quad,
            radius,
            coef,
            diag_1d,
            angles,
        })
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quad
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn coefficient(&self, dx: usize, dy: usize) -> f64 {
        debug_assert!(dx <= self.radius && dy <= self.radius);
        self.coef[dx + (self.radius + 1) * dy]
    }

    #[inline]
    pub fn pow_r(&self, x: f64) -> f64 {
        crate::lattice::pow(x, self.r)
    }

    /// Same-cell contribution to the inner integral at every cell (zero for
    /// [`Quadrature::Midpoint`]).
    pub fn diagonal_terms(&self, f: &GridFunction) -> Vec<f64> {
        if self.quad == Quadrature::Midpoint {
            return vec![0.0; f.len()];
        }
        let grad = f.gradient();
        (0..f.len())
            .map(|i| {
                if self.dim == 1 {
                    self.pow_r(grad[0].samples()[i].abs()) * self.diag_1d
                } else {
                    let (gx, gy) = (grad[0].samples()[i], grad[1].samples()[i]);
                    let mut acc = Neumaier::new();
                    for &(c, s, w) in &self.angles {
                        acc.add(w * self.pow_r((gx * c + gy * s).abs()));
                    }
                    acc.value()
                }
            })
            .collect()
    }

    /// `r`-th power bound on the same-cell part of the inner integral for a
    /// function with Lipschitz constant `lip`.
    pub fn diagonal_bound(&self, lip: f64) -> f64 {
        let (sphere, reach) = if self.dim == 1 {
            (2.0, 0.5 * self.h)
        } else {
            (2.0 * PI, 0.5 * self.h * 2f64.sqrt())
        };
        self.pow_r(lip) * sphere * reach.powf(self.a) / self.a
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// A cell block with its folded axis indices.
#[derive(Debug, Clone)]
pub struct FoldedBox {
    pub cells: CellBox,
    fx: Vec<usize>,
    fy: Vec<usize>,
}

impl FoldedBox {
    pub fn new(f: &GridFunction, mut cells: CellBox, ext: Extension) -> Result<Self> {
        // validates the extension rule
        f.box_cells(&cells, ext)?;
        if f.dim() == 1 {
            cells.lo[1] = 0;
        }
        let n = f.n();
        let fx = (0..cells.len as i64)
            .map(|k| fold(cells.lo[0] + k, n))
            .collect();
        let fy = if f.dim() == 2 {
            (0..cells.len as i64)
                .map(|k| fold(cells.lo[1] + k, n))
                .collect()
        } else {
            vec![0]
        };
        Ok(Self { cells, fx, fy })
    }

    /// The inner integral `∫_box |f(x) − f(y)|^r |x − y|^{−d−sr} dy` at the
    /// grid cell `x` (which must lie inside the box), plus `diag`.
    pub fn inner(&self, kernel: &PairKernel, f: &GridFunction, x: usize, diag: f64) -> f64 {
        let n = f.n();
        let vals = f.samples();
        let fx0 = vals[x];
        let (cx, cy) = ((x % n) as i64, (x / n) as i64);
        let mut acc = Neumaier::new();
        acc.add(diag);
        for (j, &row) in self.fy.iter().enumerate() {
            let dy = (self.cells.lo[1] + j as i64 - cy).unsigned_abs() as usize;
            let base = row * n;
            for (i, &col) in self.fx.iter().enumerate() {
                let dx = (self.cells.lo[0] + i as i64 - cx).unsigned_abs() as usize;
                if dx == 0 && dy == 0 {
                    continue;
                }
                let diff = (fx0 - vals[base + col]).abs();
                if diff != 0.0 {
                    acc.add(kernel.pow_r(diff) * kernel.coefficient(dx, dy));
                }
            }
        }
        acc.value()
    }
}
