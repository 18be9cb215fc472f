use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::lattice::{DyadicIndex, GridFunction};

/// A member cube with its witness set `E_R` (sorted linear cell indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMember {
    pub index: DyadicIndex,
    pub witness: Vec<usize>,
}

/// A collection of dyadic cubes of one grid together with explicit witness
/// sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFamily {
    pub threshold: f64,
    pub dim: usize,
    pub n: usize,
    pub members: Vec<SparseMember>,
}

#[derive(Serialize, Deserialize)]
struct MemberDoc {
    generation: u32,
    coords: Vec<u32>,
    witness_cell_ranges: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
struct FamilyDoc {
    threshold: f64,
    dim: usize,
    n: usize,
    members: Vec<MemberDoc>,
}

fn to_ranges(cells: &[usize]) -> Vec<[usize; 2]> {
    let mut out: Vec<[usize; 2]> = Vec::new();
    for &c in cells {
        match out.last_mut() {
            Some(last) if last[1] == c => last[1] = c + 1,
            _ => out.push([c, c + 1]),
        }
    }
    out
}

impl SparseFamily {
    /// `{Q}` with `E_Q = Q`.
    pub fn root(dim: usize, n: usize) -> Self {
        Self {
            threshold: super::STOPPING_THRESHOLD,
            dim,
            n,
            members: vec![SparseMember {
                index: DyadicIndex::ROOT,
                witness: (0..n.pow(dim as u32)).collect(),
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Cells of a member cube in increasing linear order.
    pub fn cube_cells(&self, idx: &DyadicIndex) -> Vec<usize> {
        let len = self.n >> idx.generation;
        let lo = [idx.coords[0] as usize * len, idx.coords[1] as usize * len];
        if self.dim == 1 {
            (lo[0]..lo[0] + len).collect()
        } else {
            (lo[1]..lo[1] + len)
                .flat_map(|j| (lo[0]..lo[0] + len).map(move |i| i + self.n * j))
                .collect()
        }
    }

    pub fn cells_in(&self, idx: &DyadicIndex) -> usize {
        (self.n >> idx.generation).pow(self.dim as u32)
    }

    pub fn check_grid(&self, f: &GridFunction) -> Result<()> {
        if f.dim() != self.dim || f.n() != self.n {
            return Err(crate::Error::GridMismatch(format!(
                "family built on a {}-dimensional grid with n = {}, function has d = {} and n = {}",
                self.dim,
                self.n,
                f.dim(),
                f.n()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = FamilyDoc {
            threshold: self.threshold,
            dim: self.dim,
            n: self.n,
            members: self
                .members
                .iter()
                .map(|m| MemberDoc {
                    generation: m.index.generation,
                    coords: m.index.coords[..self.dim].to_vec(),
                    witness_cell_ranges: to_ranges(&m.witness),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("family serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FamilyDoc = serde_json::from_str(text)
            .map_err(|e| param(format!("malformed sparse family document: {e}")))?;
        if !(1..=2).contains(&doc.dim) || !doc.n.is_power_of_two() {
            return Err(param("sparse family document has an invalid grid"));
        }
        let total = doc.n.pow(doc.dim as u32);
        let members = doc
            .members
            .into_iter()
            .map(|m| {
                if m.coords.len() != doc.dim || (doc.n >> m.generation) == 0 {
                    return Err(param("sparse family member does not fit the grid"));
                }
                let mut witness = Vec::new();
                for [a, b] in m.witness_cell_ranges {
                    if a > b || b > total {
                        return Err(param(format!(
                            "witness range [{a}, {b}) is outside the grid"
                        )));
                    }
                    witness.extend(a..b);
                }
                Ok(SparseMember {
                    index: DyadicIndex::new(m.generation, &m.coords),
                    witness,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            threshold: doc.threshold,
            dim: doc.dim,
            n: doc.n,
            members,
        })
    }
}

/// Whether the witnesses are pairwise disjoint, lie in their cubes and fill
/// at least half of them; also returns the smallest `|E_R|/|R|`.
pub fn sparsity_check(family: &SparseFamily) -> (bool, f64) {
    let total = family.n.pow(family.dim as u32);
    let mut used = vec![false; total];
    let mut ok = true;
    let mut min_ratio = f64::INFINITY;
    for m in &family.members {
        let cells = family.cells_in(&m.index);
        let len = family.n >> m.index.generation;
        for &c in &m.witness {
            if c >= total || used[c] {
                ok = false;
                continue;
            }
            used[c] = true;
            let (i, j) = (c % family.n, c / family.n);
            let inside = i / len == m.index.coords[0] as usize
                && (family.dim == 1 || j / len == m.index.coords[1] as usize);
            if !inside {
                ok = false;
            }
        }
        if 2 * m.witness.len() < cells {
            ok = false;
        }
        min_ratio = min_ratio.min(m.witness.len() as f64 / cells as f64);
    }
    (ok, min_ratio)
}
