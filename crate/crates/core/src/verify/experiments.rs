use serde::{Deserialize, Serialize};

use super::suite::profile;
use crate::error::{param, Result};
use crate::lattice::{pow, Cube, GridFunction};
use crate::norms::{gradient_norm, tl_seminorm_with, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub s: f64,
    /// Transition half-width `2^{−1−2/(1−sq)}`.
    pub eps: f64,
    pub seminorm: f64,
    /// `(1 − sq)·[f]^q`.
    pub product_with_gap: f64,
    /// `‖f′‖_{L¹}`.
    pub grad_norm: f64,
}

/// Transition half-width used at smoothness `s`.
pub fn sharpness_eps(q: f64, s: f64) -> f64 {
    pow(2.0, -1.0 - 2.0 / (1.0 - s * q))
}

/// Rejects `s` outside `1/2 < sq < 1` and transitions narrower than four
/// cells of an `n`-cell grid on `[−1, 1]`.
pub fn sharpness_guard(q: f64, s: f64, n: usize) -> Result<()> {
    let sq = s * q;
    if !(sq > 0.5 && sq < 1.0) {
        return Err(param(format!("requires 1/2 < sq < 1, got sq = {sq}")));
    }
    let eps = sharpness_eps(q, s);
    if eps < 4.0 / n as f64 {
        return Err(param(format!(
            "grid guard ε ≥ 4/n violated: ε = 2^{} < 4/{n}; refine the grid or lower s",
            eps.log2()
        )));
    }
    Ok(())
}

/// `f(x) = profile(x/ε)` on `[−1, 1]` for each `s`, with
/// `ε = 2^{−1−2/(1−sq)}`; the transition must span at least four cells.
pub fn sharpness_experiment(
    q: f64,
    r: f64,
    s_grid: &[f64],
    n: usize,
    quad: Quadrature,
) -> Result<Vec<SharpnessRow>> {
    if !n.is_power_of_two() {
        return Err(param(format!("n must be a power of two, got {n}")));
    }
    let cube = Cube::new(&[-1.0], 2.0)?;
    let one = GridFunction::constant(cube, n, 1.0)?;
    s_grid
        .iter()
        .map(|&s| {
            sharpness_guard(q, s, n)?;
            let (sq, eps) = (s * q, sharpness_eps(q, s));
            let f = GridFunction::from_fn(cube, n, |x| profile(x[0] / eps))?;
            let seminorm = tl_seminorm_with(&f, &one, q, r, s, quad)?.value;
            Ok(SharpnessRow {
                s,
                eps,
                seminorm,
                product_with_gap: (1.0 - sq) * pow(seminorm, q),
                grad_norm: gradient_norm(&f, &one, 1.0)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BbmRow {
    pub s: f64,
    pub seminorm: f64,
    /// `(1 − s)^{1/r}·[f]_{F^{s,σ}_{p,r}}`.
    pub product: f64,
}

/// The BBM-normalized seminorm along `s_grid`.
pub fn bbm_sweep(
    f: &GridFunction,
    sigma: &GridFunction,
    p: f64,
    r: f64,
    s_grid: &[f64],
    quad: Quadrature,
) -> Result<Vec<BbmRow>> {
    s_grid
        .iter()
        .map(|&s| {
            let seminorm = tl_seminorm_with(f, sigma, p, r, s, quad)?.value;
            Ok(BbmRow {
                s,
                seminorm,
                product: pow(1.0 - s, 1.0 / r) * seminorm,
            })
        })
        .collect()
}
