//! Weight constructors used by the experiment suites.

use crate::error::{param, Result};
use crate::lattice::{Cube, GridFunction};

/// `|x − c|^e` sampled at cell centers.
///
/// In 1D any cell whose closure contains `c` receives the exact cell average
/// of the power (finite for `e > −1`); in 2D a center coinciding with `c` is
/// shifted by a quarter cell in both axes.
pub fn power_law(cube: Cube, n: usize, c: &[f64], e: f64) -> Result<GridFunction> {
    let d = cube.dim();
    if c.len() != d {
        return Err(param(format!(
            "singularity has {} coordinates, cube has {d}",
            c.len()
        )));
    }
    if e <= -(d as f64) {
        return Err(param(format!(
            "|x|^{e} is not locally integrable in dimension {d}"
        )));
    }
    let mut w = GridFunction::constant(cube, n, 0.0)?;
    let h = w.h();
    let samples: Vec<f64> = (0..w.len())
        .map(|i| {
            let x = w.cell_center(i);
            if d == 1 {
                let (a, b) = (x[0] - 0.5 * h, x[0] + 0.5 * h);
                if a <= c[0] && c[0] <= b {
                    let k = e + 1.0;
                    return ((b - c[0]).powf(k) + (c[0] - a).powf(k)) / (k * h);
                }
                (x[0] - c[0]).abs().powf(e)
            } else {
                let mut dx = x[0] - c[0];
                let mut dy = x[1] - c[1];
                if dx.hypot(dy) < 1e-12 * h {
                    dx = 0.25 * h;
                    dy = 0.25 * h;
                }
                dx.hypot(dy).powf(e)
            }
        })
        .collect();
    w = GridFunction::new(cube, n, samples)?;
    Ok(w)
}

/// `left` where the first coordinate is below `split`, `right` elsewhere.
pub fn step(cube: Cube, n: usize, split: f64, left: f64, right: f64) -> Result<GridFunction> {
    GridFunction::from_fn(cube, n, |x| if x[0] < split { left } else { right })
}

/// The power pair `(|x−c|^{−γ₁d}, |x−c|^{γ₂d})`.
pub fn power_pair(
    cube: Cube,
    n: usize,
    c: &[f64],
    gamma1: f64,
    gamma2: f64,
) -> Result<(GridFunction, GridFunction)> {
    let d = cube.dim() as f64;
    Ok((
        power_law(cube, n, c, -gamma1 * d)?,
        power_law(cube, n, c, gamma2 * d)?,
    ))
}
