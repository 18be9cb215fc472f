use serde::{Deserialize, Serialize};

use super::config::{inv_conjugate, ExponentConfig};
use crate::error::{param, Error, Result};
use crate::lattice::{pow, DyadicIndex, GridFunction, Pyramid};

/// Outcome of a supremum over the dyadic family of depth `family_depth`.
///
/// The value is a lower bound for the supremum over all subcubes, and
/// `lower_bound_flag` is always set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicReport {
    pub value: f64,
    pub attaining_cube: DyadicIndex,
    pub family_depth: u32,
    pub lower_bound_flag: bool,
}

fn check_depth(w: &GridFunction, depth: u32) -> Result<()> {
    if depth > w.max_generation() {
        return Err(param(format!(
            "depth {depth} exceeds the grid's deepest generation {}",
            w.max_generation()
        )));
    }
    Ok(())
}

/// Running argmax with first-wins tie breaking in (generation, slot) order.
struct Best {
    value: f64,
    at: DyadicIndex,
}

impl Best {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            at: DyadicIndex::ROOT,
        }
    }

    fn offer(&mut self, v: f64, at: DyadicIndex) {
        if v > self.value {
            self.value = v;
            self.at = at;
        }
    }

    fn report(self, depth: u32) -> CharacteristicReport {
        CharacteristicReport {
            value: self.value,
            attaining_cube: self.at,
            family_depth: depth,
            lower_bound_flag: true,
        }
    }
}

/// Per-cube `⟨g⟩_{1/inv, R}^{…}`-style factor: `⟨w^{-1}⟩_{e,R}` for `e = 1/inv_e`,
/// or the cell maximum of `w^{-1}` when `inv_e = 0`.
struct InverseAverage {
    inv_e: f64,
    pyramid: Pyramid,
}

impl InverseAverage {
    fn new(w: &GridFunction, inv_e: f64) -> Self {
        let pyramid = if inv_e == 0.0 {
            let v: Vec<f64> = w.samples().iter().map(|x| 1.0 / x).collect();
            Pyramid::maxima(&v, w.n(), w.dim())
        } else {
            let e = 1.0 / inv_e;
            let v: Vec<f64> = w.samples().iter().map(|x| pow(1.0 / x, e)).collect();
            Pyramid::sums(&v, w.n(), w.dim())
        };
        Self { inv_e, pyramid }
    }

    fn at(&self, idx: &DyadicIndex) -> f64 {
        let v = self.pyramid.get(idx);
        if self.inv_e == 0.0 {
            v
        } else {
            pow(
                v / self.pyramid.cells_per_cube(idx.generation) as f64,
                self.inv_e,
            )
        }
    }
}

/// `max_R |R|^α ⟨ω⟩_{q,R} ⟨σ^{-1}⟩_{p′,R}` over dyadic `R` of generation ≤ `depth`.
pub fn apq_characteristic(
    omega: &GridFunction,
    sigma: &GridFunction,
    p: f64,
    q: f64,
    alpha: f64,
    depth: u32,
) -> Result<CharacteristicReport> {
    omega.check_same_grid(sigma)?;
    omega.check_positive()?;
    sigma.check_positive()?;
    check_depth(omega, depth)?;
    if !(p >= 1.0 && q >= 1.0 && q.is_finite()) {
        return Err(param(format!(
            "characteristic needs p, q ≥ 1 and q < ∞, got p = {p}, q = {q}"
        )));
    }
    let dim = omega.dim();
    let omega_q: Vec<f64> = omega.samples().iter().map(|&w| pow(w, q)).collect();
    let om = Pyramid::sums(&omega_q, omega.n(), dim);
    let sig = InverseAverage::new(sigma, inv_conjugate(p));
    let volume = omega.cube().volume();
    let mut best = Best::new();
    for g in 0..=depth {
        let size = pow(volume / DyadicIndex::count(g, dim) as f64, alpha);
        let cells = om.cells_per_cube(g) as f64;
        for idx in DyadicIndex::generation_iter(g, dim) {
            let v = size * pow(om.get(&idx) / cells, 1.0 / q) * sig.at(&idx);
            best.offer(v, idx);
        }
    }
    Ok(best.report(depth))
}

/// `[ω,σ]_{A^α_{p,q}}` restricted to the dyadic family of depth `depth`.
pub fn apq_alpha(
    omega: &GridFunction,
    sigma: &GridFunction,
    cfg: &ExponentConfig,
    depth: u32,
) -> Result<CharacteristicReport> {
    apq_characteristic(omega, sigma, cfg.p, cfg.q, cfg.alpha, depth)
}

/// Fujii–Wilson `[w]_{A_∞}`: `max_R (1/w(R)) ∫_R M_R w`, with the localized
/// maximal function taken over dyadic `S ⊆ R` of generation ≤ `depth`.
pub fn ainfty(w: &GridFunction, depth: u32) -> Result<CharacteristicReport> {
    w.check_positive()?;
    check_depth(w, depth)?;
    let dim = w.dim();
    let sums = Pyramid::sums_of(w);
    let avgs: Vec<Vec<f64>> = (0..=depth).map(|g| sums.averages(g)).collect();
    let mut best = Best::new();
    for j in 0..=depth {
        let mut running = avgs[j as usize].clone();
        for g in j + 1..=depth {
            let fine = &avgs[g as usize];
            running = (0..fine.len())
                .map(|s| {
                    let child = DyadicIndex::from_slot(g, s, dim);
                    running[child.parent().unwrap().slot()].max(fine[s])
                })
                .collect();
        }
        let leaves_per_root = DyadicIndex::count(depth - j, dim);
        let mut totals = vec![crate::sum::Neumaier::new(); DyadicIndex::count(j, dim)];
        for (s, &m) in running.iter().enumerate() {
            let leaf = DyadicIndex::from_slot(depth, s, dim);
            totals[leaf.ancestor(j).slot()].add(m);
        }
        for idx in DyadicIndex::generation_iter(j, dim) {
            let mean_max = totals[idx.slot()].value() / leaves_per_root as f64;
            best.offer(mean_max / avgs[j as usize][idx.slot()], idx);
        }
    }
    Ok(best.report(depth))
}

/// `[w]_{A_u}` over the dyadic family: `max_R ⟨w⟩_{1,R} ⟨w^{-1}⟩_{1/(u−1),R}`,
/// with `⟨w⟩_R · max_R w^{-1}` at `u = 1`.
pub fn au_characteristic(w: &GridFunction, u: f64, depth: u32) -> Result<CharacteristicReport> {
    if u.is_nan() || u < 1.0 || u.is_infinite() {
        return Err(param(format!(
            "A_u class index must satisfy u ≥ 1, got {u}"
        )));
    }
    w.check_positive()?;
    check_depth(w, depth)?;
    let dim = w.dim();
    let sums = Pyramid::sums_of(w);
    let inv = InverseAverage::new(w, u - 1.0);
    let mut best = Best::new();
    for g in 0..=depth {
        let cells = sums.cells_per_cube(g) as f64;
        for idx in DyadicIndex::generation_iter(g, dim) {
            best.offer(sums.get(&idx) / cells * inv.at(&idx), idx);
        }
    }
    Ok(best.report(depth))
}

/// Result of the reverse-Hölder search behind the endpoint reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolder {
    /// Largest tested `s` with `⟨ω⟩_{qs,Q} ≤ 2⟨ω⟩_{q,Q}`.
    pub s_star: f64,
    /// `1/(q s*) + 1/p′`.
    pub beta: f64,
    /// `[ω,σ]_{A^β_{p,q}}` over the full dyadic family.
    pub reduced: f64,
    /// `2|Q|^{β−α}[ω,σ]_{A^α_{p,q}}` at the endpoint `α = 1/q + 1/p′`.
    pub bound: f64,
}

pub const REVERSE_HOLDER_CAP: f64 = 8.0;
pub const REVERSE_HOLDER_TOL: f64 = 1e-3;

/// Bisection for the reverse-Hölder exponent of `ω` on `Q`, then the
/// certificate `[ω,σ]_{A^β} ≤ 2|Q|^{β−α}[ω,σ]_{A^α}` at `α = 1/q + 1/p′`.
pub fn reverse_holder_beta(
    omega: &GridFunction,
    sigma: &GridFunction,
    cfg: &ExponentConfig,
) -> Result<ReverseHolder> {
    omega.check_positive()?;
    let q = cfg.q;
    let whole = |e: f64| {
        let v: Vec<f64> = omega.samples().iter().map(|&w| pow(w, e)).collect();
        pow(crate::sum::sum(v) / omega.len() as f64, 1.0 / e)
    };
    let target = 2.0 * whole(q);
    let holds = |s: f64| whole(q * s) <= target;
    let s_star = if holds(REVERSE_HOLDER_CAP) {
        REVERSE_HOLDER_CAP
    } else {
        let (mut lo, mut hi) = (1.0, REVERSE_HOLDER_CAP);
        while hi - lo > REVERSE_HOLDER_TOL {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if s_star < 1.0 + REVERSE_HOLDER_TOL {
        return Err(Error::SearchFailure(format!(
            "no s > 1 + {REVERSE_HOLDER_TOL} with ⟨ω⟩_(qs) ≤ 2⟨ω⟩_q; weight too singular for the grid"
        )));
    }
    let inv_pp = inv_conjugate(cfg.p);
    let alpha = 1.0 / q + inv_pp;
    let beta = 1.0 / (q * s_star) + inv_pp;
    let depth = omega.max_generation();
    let reduced = apq_characteristic(omega, sigma, cfg.p, q, beta, depth)?.value;
    let endpoint = apq_characteristic(omega, sigma, cfg.p, q, alpha, depth)?.value;
    let bound = 2.0 * omega.cube().volume().powf(beta - alpha) * endpoint;
    Ok(ReverseHolder {
        s_star,
        beta,
        reduced,
        bound,
    })
}
