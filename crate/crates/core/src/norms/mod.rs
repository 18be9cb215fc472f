//! Weighted Lebesgue norms, the Triebel–Lizorkin seminorm and pointwise
//! difference quotients.

mod kernel;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::{FoldedBox, PairKernel, Quadrature};

use crate::error::{param, Result};
use crate::lattice::{pow, CellBox, Cube, Extension, GridFunction};
use crate::sum::{sum, Neumaier};
use crate::weights::ExponentConfig;

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(param(format!("norm exponent must lie in [1, ∞], got {p}")))
    }
}

/// `(∫_Q |f|^p σ^p)^{1/p}`; the weight is a multiplier.
pub fn lp_norm(f: &GridFunction, sigma: &GridFunction, p: f64) -> Result<f64> {
    f.check_same_grid(sigma)?;
    check_exponent(p)?;
    let (fs, ws) = (f.samples(), sigma.samples());
    if p.is_infinite() {
        return Ok((0..f.len())
            .map(|i| (fs[i] * ws[i]).abs())
            .fold(0.0, f64::max));
    }
    let total = sum((0..f.len()).map(|i| pow((fs[i] * ws[i]).abs(), p)));
    Ok(pow(total * f.cell_volume(), 1.0 / p))
}

/// Unweighted `‖f‖_{L^p(Q)}`.
pub fn lp_norm_unweighted(f: &GridFunction, p: f64) -> Result<f64> {
    lp_norm(f, &GridFunction::constant(*f.cube(), f.n(), 1.0)?, p)
}

/// `sup_λ λ σ^p({|f| > λ})^{1/p}`, exact for grid functions.
pub fn weak_lp_norm(f: &GridFunction, sigma: &GridFunction, p: f64) -> Result<f64> {
    f.check_same_grid(sigma)?;
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(f.samples().iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    let mut cells: Vec<(f64, f64)> = f
        .samples()
        .iter()
        .zip(sigma.samples())
        .map(|(v, w)| (v.abs(), pow(w.abs(), p)))
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    // walk magnitudes downwards; the level set {|f| ≥ v} grows monotonically
    let vol = f.cell_volume();
    let mut mass = Neumaier::new();
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < cells.len() {
        let v = cells[i].0;
        while i < cells.len() && cells[i].0 == v {
            mass.add(cells[i].1);
            i += 1;
        }
        if v > 0.0 {
            best = best.max(v * pow(mass.value() * vol, 1.0 / p));
        }
    }
    Ok(best)
}

/// `‖∇f‖_{L^p_σ}` using the finite-difference gradient magnitude.
pub fn gradient_norm(f: &GridFunction, sigma: &GridFunction, p: f64) -> Result<f64> {
    lp_norm(&f.gradient_magnitude(), sigma, p)
}

/// `∫_R f w / ∫_R w`.
pub fn weighted_average(f: &GridFunction, w: &GridFunction, r: &Cube) -> Result<f64> {
    f.check_same_grid(w)?;
    let cells = f.box_cells(&f.cell_box(r)?, Extension::None)?;
    Ok(weighted_average_cells(f, w, &cells))
}

pub(crate) fn weighted_average_cells(f: &GridFunction, w: &GridFunction, cells: &[usize]) -> f64 {
    let (fs, ws) = (f.samples(), w.samples());
    let num = sum(cells.iter().map(|&i| fs[i] * ws[i]));
    let den = sum(cells.iter().map(|&i| ws[i]));
    num / den
}

/// `‖f − c‖_{L^q_ω(Q)}`.
pub fn deviation(f: &GridFunction, omega: &GridFunction, q: f64, c: f64) -> Result<f64> {
    lp_norm(&f.map(|v| v - c), omega, q)
}

/// Golden-section minimizer of `c ↦ ‖f − c‖_{L^q_ω}` over `[min f, max f]`,
/// returning `(c, value)`. The objective is convex in `c`.
pub fn inf_over_constants(f: &GridFunction, omega: &GridFunction, q: f64) -> Result<(f64, f64)> {
    f.check_same_grid(omega)?;
    check_exponent(q)?;
    let (mut a, mut b) = (f.min(), f.max());
    let tol = 1e-8 * (b - a);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let obj = |c: f64| deviation(f, omega, q, c);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (obj(x1)?, obj(x2)?);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = obj(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = obj(x2)?;
        }
    }
    let mut best = (x1, f1);
    for c in [x2, f.min(), f.max()] {
        let v = obj(c)?;
        if v < best.1 {
            best = (c, v);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormResult {
    pub value: f64,
    /// Ordered off-diagonal cell pairs visited.
    pub pair_count: u64,
    /// Upper bound on the change in `value` caused by the same-cell part of
    /// the kernel, from the Lipschitz constant of the samples.
    pub excluded_diagonal_mass_bound: f64,
}

/// Reusable evaluator of `f_R^{s,r}(x)` for one function and kernel.
#[derive(Debug, Clone)]
pub struct DifferenceQuotients<'a> {
    f: &'a GridFunction,
    kernel: PairKernel,
    diag: Vec<f64>,
}

impl<'a> DifferenceQuotients<'a> {
    pub fn new(f: &'a GridFunction, r: f64, s: f64, quad: Quadrature) -> Result<Self> {
        let kernel = PairKernel::new(f, r, s, quad)?;
        let diag = kernel.diagonal_terms(f);
        Ok(Self { f, kernel, diag })
    }

    pub fn kernel(&self) -> &PairKernel {
        &self.kernel
    }

    pub fn function(&self) -> &GridFunction {
        self.f
    }

    /// Inner integrals `(f_R^{s,r})^r` at every cell of `inside`, where the
    /// integration box is `region`; parallel over cells, in cell order.
    pub fn inner_powers(&self, region: &FoldedBox, inside: &[usize]) -> Vec<f64> {
        inside
            .par_iter()
            .map(|&x| region.inner(&self.kernel, self.f, x, self.diag[x]))
            .collect()
    }

    /// `f_R^{s,r}(x)` for a single cell `x`.
    pub fn at(&self, region: &FoldedBox, x: usize) -> f64 {
        pow(
            region.inner(&self.kernel, self.f, x, self.diag[x]),
            1.0 / self.kernel.r(),
        )
    }
}

/// `[f]_{F^{s,σ}_{p,r}(Q)}` with the default quadrature.
pub fn tl_seminorm(
    f: &GridFunction,
    sigma: &GridFunction,
    cfg: &ExponentConfig,
) -> Result<SeminormResult> {
    tl_seminorm_with(f, sigma, cfg.p, cfg.r, cfg.s, Quadrature::default())
}

/// `(∫_Q (∫_Q |f(x)−f(y)|^r |x−y|^{−d−sr} dy)^{p/r} σ(x)^p dx)^{1/p}`.
pub fn tl_seminorm_with(
    f: &GridFunction,
    sigma: &GridFunction,
    p: f64,
    r: f64,
    s: f64,
    quad: Quadrature,
) -> Result<SeminormResult> {
    f.check_same_grid(sigma)?;
    check_exponent(p)?;
    let dq = DifferenceQuotients::new(f, r, s, quad)?;
    let inner = whole_cube_inner(&dq)?;
    let value = seminorm_from_inner(f, &inner, sigma, p, r)?;
    let n = f.len() as u64;
    let lip = f.gradient_magnitude().max();
    let one = GridFunction::constant(*f.cube(), f.n(), 1.0)?;
    let bound = pow(dq.kernel.diagonal_bound(lip), 1.0 / r) * lp_norm(&one, sigma, p)?;
    Ok(SeminormResult {
        value,
        pair_count: n * (n - 1),
        excluded_diagonal_mass_bound: bound,
    })
}

fn whole_cube_inner(dq: &DifferenceQuotients) -> Result<Vec<f64>> {
    let f = dq.function();
    let whole = CellBox {
        lo: [0, 0],
        len: f.n(),
    };
    let region = FoldedBox::new(f, whole, Extension::None)?;
    let cells: Vec<usize> = (0..f.len()).collect();
    Ok(dq.inner_powers(&region, &cells))
}

/// `∫_Q |f(x)−f(y)|^r |x−y|^{−d−sr} dy` at every cell `x`, for evaluating
/// the seminorm against several weights.
pub fn seminorm_inner(f: &GridFunction, r: f64, s: f64, quad: Quadrature) -> Result<Vec<f64>> {
    whole_cube_inner(&DifferenceQuotients::new(f, r, s, quad)?)
}

/// The seminorm assembled from [`seminorm_inner`] output.
pub fn seminorm_from_inner(
    f: &GridFunction,
    inner: &[f64],
    sigma: &GridFunction,
    p: f64,
    r: f64,
) -> Result<f64> {
    f.check_same_grid(sigma)?;
    check_exponent(p)?;
    if inner.len() != f.len() {
        return Err(param("inner integrals do not match the grid"));
    }
    let ws = sigma.samples();
    if p.is_infinite() {
        return Ok(inner
            .iter()
            .enumerate()
            .map(|(i, v)| pow(*v, 1.0 / r) * ws[i].abs())
            .fold(0.0, f64::max));
    }
    let terms: Vec<f64> = inner
        .par_iter()
        .enumerate()
        .map(|(i, v)| pow(*v, p / r) * pow(ws[i].abs(), p))
        .collect();
    Ok(pow(sum(terms) * f.cell_volume(), 1.0 / p))
}

/// `f_R^{s,r}(x)` at the cell `x` of `f`, with `R` any grid-aligned cube;
/// `reflect` allows `R` to leave the cube of `f`.
pub fn difference_quotient(
    f: &GridFunction,
    r: &Cube,
    x: usize,
    cfg: &ExponentConfig,
    reflect: bool,
) -> Result<f64> {
    difference_quotient_with(f, r, x, cfg.r, cfg.s, reflect, Quadrature::default())
}

pub fn difference_quotient_with(
    f: &GridFunction,
    r: &Cube,
    x: usize,
    rr: f64,
    s: f64,
    reflect: bool,
    quad: Quadrature,
) -> Result<f64> {
    if x >= f.len() {
        return Err(param(format!(
            "cell {x} is outside a grid of {} cells",
            f.len()
        )));
    }
    let ext = if reflect {
        Extension::Reflect
    } else {
        Extension::None
    };
    let region = FoldedBox::new(f, f.cell_box(r)?, ext)?;
    let c = f.cell_coords(x);
    let b = region.cells;
    if (0..f.dim()).any(|a| (c[a] as i64) < b.lo[a] || c[a] as i64 >= b.lo[a] + b.len as i64) {
        return Err(param(format!(
            "cell {x} does not lie in the integration cube"
        )));
    }
    Ok(DifferenceQuotients::new(f, rr, s, quad)?.at(&region, x))
}
