//! Stopping-time constructions of sparse families.

use rayon::prelude::*;

use super::family::{SparseFamily, SparseMember};
use super::STOPPING_THRESHOLD;
use crate::error::{param, Result};
use crate::lattice::{pow, DyadicIndex, Extension, GridFunction, Pyramid};
use crate::norms::{DifferenceQuotients, FoldedBox, Quadrature};
use crate::weights::ExponentConfig;

/// Maximal `S ⊊ R` (down to generation `max_gen`) for which at least one of
/// the per-cell quantities has `⟨·⟩_S > 4⟨·⟩_R`.
///
/// `quantities` are given in local cell order of `R` (axis 0 fastest, `len`
/// cells per side).
pub(crate) fn stopping_children(
    idx: DyadicIndex,
    dim: usize,
    len: usize,
    max_gen: u32,
    quantities: &[Vec<f64>],
) -> Vec<DyadicIndex> {
    let pyramids: Vec<Pyramid> = quantities
        .iter()
        .map(|q| Pyramid::sums(q, len, dim))
        .collect();
    let local_depth = len
        .trailing_zeros()
        .min(max_gen.saturating_sub(idx.generation));
    let cells_r = len.pow(dim as u32) as f64;
    let mut out = Vec::new();
    // blocked[slot] marks local cubes at the current level lying inside a selected cube
    let mut blocked = vec![false; 1];
    for k in 1..=local_depth {
        let side = 1usize << k;
        let cells_s = (len >> k).pow(dim as u32) as f64;
        let count = DyadicIndex::count(k, dim);
        let mut next = vec![false; count];
        for (slot, flag) in next.iter_mut().enumerate() {
            let (i, j) = (slot % side, slot / side);
            let parent = (i / 2) + (side / 2) * (j / 2);
            if blocked[parent] {
                *flag = true;
                continue;
            }
            let stops = pyramids.iter().any(|p| {
                let total = p.level(0)[0];
                p.level(k)[slot] * cells_r > STOPPING_THRESHOLD * total * cells_s
            });
            if stops {
                *flag = true;
                let mut coords = [(idx.coords[0] << k) + i as u32, 0];
                if dim == 2 {
                    coords[1] = (idx.coords[1] << k) + j as u32;
                }
                out.push(DyadicIndex::new(idx.generation + k, &coords[..dim]));
            }
        }
        blocked = next;
    }
    out
}

/// Runs the stopping recursion from `Q`, with `quantities(R, cells of R)`
/// giving the per-cell stopping quantities of a member.
pub(crate) fn build_family<F>(f: &GridFunction, max_gen: u32, quantities: F) -> Result<SparseFamily>
where
    F: Fn(&DyadicIndex, &[usize]) -> Vec<Vec<f64>> + Sync,
{
    if max_gen > f.max_generation() {
        return Err(param(format!(
            "depth {max_gen} exceeds the grid's finest generation {}",
            f.max_generation()
        )));
    }
    let mut family = SparseFamily::root(f.dim(), f.n());
    family.members.clear();
    let mut frontier = vec![DyadicIndex::ROOT];
    while !frontier.is_empty() {
        let fam = &family;
        let done: Vec<(DyadicIndex, Vec<usize>, Vec<DyadicIndex>)> = frontier
            .par_iter()
            .map(|idx| {
                let cells = fam.cube_cells(idx);
                let qs = quantities(idx, &cells);
                let len = f.n() >> idx.generation;
                let kids = stopping_children(*idx, f.dim(), len, max_gen, &qs);
                (*idx, cells, kids)
            })
            .collect();
        let mut next = Vec::new();
        for (idx, cells, kids) in done {
            let mut covered: Vec<usize> = kids.iter().flat_map(|k| family.cube_cells(k)).collect();
            covered.sort_unstable();
            let witness = cells
                .into_iter()
                .filter(|c| covered.binary_search(c).is_err())
                .collect();
            family.members.push(SparseMember {
                index: idx,
                witness,
            });
            next.extend(kids);
        }
        frontier = next;
    }
    family.members.sort_by_key(|m| m.index);
    Ok(family)
}

/// `|f − ⟨f⟩_R|` on the cells of `R`.
pub(crate) fn oscillation_values(f: &GridFunction, cells: &[usize]) -> Vec<f64> {
    let m = f.mean_cells(cells);
    cells.iter().map(|&c| (f.samples()[c] - m).abs()).collect()
}

/// `f_{3R}^{s,r}` on the cells of `R`, with `3R` sampled by reflection.
pub(crate) fn triple_quotients(
    dq: &DifferenceQuotients<'_>,
    idx: &DyadicIndex,
    cells: &[usize],
) -> Vec<f64> {
    let f = dq.function();
    let region = FoldedBox::new(f, f.dyadic_box(idx).triple(), Extension::Reflect)
        .expect("reflection accepts any box");
    let r = dq.kernel().r();
    dq.inner_powers(&region, cells)
        .into_iter()
        .map(|v| pow(v, 1.0 / r))
        .collect()
}

/// Single-condition stopping family for `|f − ⟨f⟩_R|`.
pub fn oscillation_sparse(f: &GridFunction, max_gen: u32) -> Result<SparseFamily> {
    build_family(f, max_gen, |_, cells| vec![oscillation_values(f, cells)])
}

/// Two-condition stopping family for `f_{3R}^{s,r}` and `|f − ⟨f⟩_R|`.
pub fn fractional_sparse(
    f: &GridFunction,
    cfg: &ExponentConfig,
    max_gen: u32,
) -> Result<SparseFamily> {
    fractional_sparse_with(f, cfg.r, cfg.s, Quadrature::default(), max_gen)
}

pub fn fractional_sparse_with(
    f: &GridFunction,
    r: f64,
    s: f64,
    quad: Quadrature,
    max_gen: u32,
) -> Result<SparseFamily> {
    let dq = DifferenceQuotients::new(f, r, s, quad)?;
    build_family(f, max_gen, |idx, cells| {
        vec![
            triple_quotients(&dq, idx, cells),
            oscillation_values(f, cells),
        ]
    })
}
