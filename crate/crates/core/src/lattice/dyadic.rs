use serde::{Deserialize, Serialize};

use super::cube::MAX_DIM;

/// Address of a dyadic subcube: generation `j` and integer coordinates in `[0, 2^j)`.
///
/// Coordinates past the ambient dimension are kept at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub generation: u32,
    pub coords: [u32; MAX_DIM],
}

impl DyadicIndex {
    pub const ROOT: DyadicIndex = DyadicIndex {
        generation: 0,
        coords: [0; MAX_DIM],
    };

    pub fn new(generation: u32, coords: &[u32]) -> Self {
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        debug_assert!(c.iter().all(|&k| (k as u64) < (1u64 << generation)));
        Self {
            generation,
            coords: c,
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.generation > 0).then(|| Self {
            generation: self.generation - 1,
            coords: [self.coords[0] >> 1, self.coords[1] >> 1],
        })
    }

    /// The `2^dim` children, in the same order as [`DyadicIndex::slot`].
    pub fn children(&self, dim: usize) -> impl Iterator<Item = DyadicIndex> + '_ {
        (0..1u32 << dim).map(move |bits| {
            let mut coords = [0; MAX_DIM];
            for (a, c) in coords.iter_mut().enumerate().take(dim) {
                *c = (self.coords[a] << 1) | ((bits >> a) & 1);
            }
            DyadicIndex {
                generation: self.generation + 1,
                coords,
            }
        })
    }

    /// The ancestor at generation `g ≤ self.generation`.
    pub fn ancestor(&self, g: u32) -> Self {
        debug_assert!(g <= self.generation);
        let shift = self.generation - g;
        Self {
            generation: g,
            coords: [self.coords[0] >> shift, self.coords[1] >> shift],
        }
    }

    /// True when `other` is `self` or one of its descendants.
    pub fn contains(&self, other: &DyadicIndex) -> bool {
        other.generation >= self.generation && other.ancestor(self.generation) == *self
    }

    /// Position in the flat per-generation array: `k0 + 2^j k1`.
    pub fn slot(&self) -> usize {
        self.coords[0] as usize + ((self.coords[1] as usize) << self.generation)
    }

    pub fn from_slot(generation: u32, slot: usize, dim: usize) -> Self {
        let side = 1usize << generation;
        let mut coords = [0; MAX_DIM];
        coords[0] = (slot % side) as u32;
        if dim == 2 {
            coords[1] = (slot / side) as u32;
        }
        Self { generation, coords }
    }

    /// Number of cubes at generation `g`.
    pub fn count(generation: u32, dim: usize) -> usize {
        1usize << (generation as usize * dim)
    }

    pub fn generation_iter(generation: u32, dim: usize) -> impl Iterator<Item = DyadicIndex> {
        (0..Self::count(generation, dim)).map(move |s| Self::from_slot(generation, s, dim))
    }
}
