use serde::{Deserialize, Serialize};

use super::dyadic::DyadicIndex;
use crate::error::{param, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 2;

/// A point in R^d, d ≤ [`MAX_DIM`]; trailing coordinates are unused.
pub type Point = [f64; MAX_DIM];

/// Closed axis-aligned cube `origin + [0, side]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    dim: usize,
    origin: Point,
    side: f64,
}

impl Cube {
    pub fn new(origin: &[f64], side: f64) -> Result<Self> {
        let dim = origin.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(param(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(param(format!("cube side must be positive, got {side}")));
        }
        let mut o = [0.0; MAX_DIM];
        o[..dim].copy_from_slice(origin);
        Ok(Self {
            dim,
            origin: o,
            side,
        })
    }

    /// `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension must be 1 or 2");
        Self {
            dim,
            origin: [0.0; MAX_DIM],
            side: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; MAX_DIM];
        for (ci, oi) in c.iter_mut().zip(self.origin()) {
            *ci = oi + 0.5 * self.side;
        }
        c
    }

    /// Same center, side multiplied by `gamma`.
    pub fn dilate(&self, gamma: f64) -> Cube {
        assert!(gamma > 0.0, "dilation factor must be positive");
        let c = self.center();
        let side = gamma * self.side;
        let mut origin = [0.0; MAX_DIM];
        for i in 0..self.dim {
            origin[i] = c[i] - 0.5 * side;
        }
        Cube {
            dim: self.dim,
            origin,
            side,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.origin()
            .iter()
            .zip(x)
            .all(|(&a, &xi)| xi >= a && xi <= a + self.side)
    }

    /// The dyadic subcube addressed by `idx`.
    pub fn subcube(&self, idx: &DyadicIndex) -> Cube {
        let side = self.side / (1u64 << idx.generation) as f64;
        let mut origin = [0.0; MAX_DIM];
        for (i, o) in origin.iter_mut().enumerate().take(self.dim) {
            *o = self.origin[i] + idx.coords[i] as f64 * side;
        }
        Cube {
            dim: self.dim,
            origin,
            side,
        }
    }
}

/// Same-center dilate `gamma R`.
pub fn dilate(r: &Cube, gamma: f64) -> Cube {
    r.dilate(gamma)
}

/// Even-reflection `2ℓ(Q)`-periodic folding of `x` back into `Q`:
/// `y_j = (x_j - a_j) mod 2ℓ`, `x*_j = a_j + ℓ - |y_j - ℓ|`.
pub fn reflect_point(q: &Cube, x: &[f64]) -> Point {
    let l = q.side();
    let mut out = [0.0; MAX_DIM];
    for (j, &a) in q.origin().iter().enumerate() {
        let y = (x[j] - a).rem_euclid(2.0 * l);
        out[j] = a + l - (y - l).abs();
    }
    out
}

/// All dyadic subcubes of generations `0..=max_gen`, coarsest first.
pub fn dyadic_cubes(q: &Cube, max_gen: u32) -> Vec<(DyadicIndex, Cube)> {
    (0..=max_gen)
        .flat_map(|g| DyadicIndex::generation_iter(g, q.dim()))
        .map(|idx| (idx, q.subcube(&idx)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn generation_zero_is_q() {
        let q = Cube::unit(1);
        let all = dyadic_cubes(&q, 0);
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].1, q);
    }

    #[test]
    fn first_halving() {
        let q = Cube::unit(1);
        let all = dyadic_cubes(&q, 1);
        let got: Vec<(f64, f64)> = all.iter().map(|(_, c)| (c.origin()[0], c.side())).collect();
        assert_eq!(got, vec![(0.0, 1.0), (0.0, 0.5), (0.5, 0.5)]);
    }

    #[test]
    fn square_count() {
        assert_eq!(dyadic_cubes(&Cube::unit(2), 2).len(), 1 + 4 + 16);
    }

    #[test]
    fn tiling_volume_exact() {
        for d in 1..=2 {
            let q = Cube::new(&vec![-0.5; d], 2.0).unwrap();
            let all = dyadic_cubes(&q, 6);
            for g in 0..=6 {
                let v: f64 = all
                    .iter()
                    .filter(|(i, _)| i.generation == g)
                    .map(|(_, c)| c.volume())
                    .sum();
                assert_eq!(v, q.volume());
            }
        }
    }

    #[test]
    fn dilates() {
        assert_eq!(dilate(&Cube::unit(1), 1.0), Cube::unit(1));
        let r = Cube::new(&[0.25], 0.25).unwrap();
        let d = dilate(&r, 3.0);
        assert_eq!(d.origin(), &[0.0]);
        assert_eq!(d.side(), 0.75);
        let r2 = Cube::new(&[0.0, 0.0], 0.5).unwrap();
        let d2 = dilate(&r2, 3.0);
        assert_eq!(d2.origin(), &[-0.5, -0.5]);
        assert_eq!(d2.side(), 1.5);
        assert_eq!(d2.center(), r2.center());
    }

    #[test]
    fn reflection_examples() {
        let q = Cube::unit(1);
        assert!((reflect_point(&q, &[0.3])[0] - 0.3).abs() < 1e-15);
        assert!((reflect_point(&q, &[1.25])[0] - 0.75).abs() < 1e-15);
        assert!((reflect_point(&q, &[-0.3])[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_cubes() {
        assert!(Cube::new(&[0.0], 0.0).is_err());
        assert!(Cube::new(&[0.0, 0.0, 0.0], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn reflection_lands_in_q_and_is_idempotent(
            a in -3.0f64..3.0, b in -3.0f64..3.0, side in 0.1f64..4.0,
            x in -20.0f64..20.0, y in -20.0f64..20.0,
        ) {
            let q = Cube::new(&[a, b], side).unwrap();
            let once = reflect_point(&q, &[x, y]);
            prop_assert!(q.contains(&once[..2]));
            let twice = reflect_point(&q, &once[..2]);
            prop_assert!((twice[0] - once[0]).abs() <= 1e-12 * side.max(1.0));
            prop_assert!((twice[1] - once[1]).abs() <= 1e-12 * side.max(1.0));
        }

        #[test]
        fn reflection_is_periodic(a in -3.0f64..3.0, side in 0.1f64..4.0, x in -20.0f64..20.0, k in -3i32..3) {
            let q = Cube::new(&[a], side).unwrap();
            let base = reflect_point(&q, &[x])[0];
            let shifted = reflect_point(&q, &[x + 2.0 * side * k as f64])[0];
            prop_assert!((base - shifted).abs() <= 1e-9 * (1.0 + x.abs()));
        }

        #[test]
        fn interior_points_fixed(a in -3.0f64..3.0, side in 0.1f64..4.0, t in 0.0f64..1.0) {
            let q = Cube::new(&[a], side).unwrap();
            let x = a + t * side;
            prop_assert!((reflect_point(&q, &[x])[0] - x).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }
}
