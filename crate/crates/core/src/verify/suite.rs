use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::lattice::{Cube, GridFunction};
use crate::weights::families::{power_law, power_pair, step};
use crate::weights::{apq_alpha, au_characteristic, inv_conjugate, ExponentConfig};

/// Generated weights whose characteristic exceeds this are rejected.
pub const CHARACTERISTIC_CAP: f64 = 1.0e4;

/// Nonincreasing quintic profile: 1 for `t ≤ −1`, 0 for `t ≥ 1`.
pub fn profile(t: f64) -> f64 {
    let u = ((t + 1.0) / 2.0).clamp(0.0, 1.0);
    1.0 - u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FunctionSpec {
    Constant(f64),
    /// `x₁ + x₂/2` (just `x` in one dimension).
    Affine,
    /// A `C^∞` bump supported in the inscribed ball.
    Bump,
    /// `profile((x₁ − c₁)/eps)` across the center of the cube.
    Transition {
        eps: f64,
    },
    /// Seeded sum of `modes` cosines with decaying amplitudes.
    Trig {
        seed: u64,
        modes: u32,
    },
}

impl FunctionSpec {
    pub fn label(&self) -> String {
        match self {
            FunctionSpec::Constant(c) => format!("constant{c}"),
            FunctionSpec::Affine => "affine".into(),
            FunctionSpec::Bump => "bump".into(),
            FunctionSpec::Transition { eps } => format!("transition{eps}"),
            FunctionSpec::Trig { seed, modes } => format!("trig{modes}s{seed}"),
        }
    }

    pub fn sample(&self, cube: Cube, n: usize) -> Result<GridFunction> {
        let o = cube.origin().to_vec();
        let side = cube.side();
        let center = cube.center();
        match self {
            FunctionSpec::Constant(c) => GridFunction::constant(cube, n, *c),
            FunctionSpec::Affine => GridFunction::from_fn(cube, n, |x| {
                x[0] + if x.len() > 1 { 0.5 * x[1] } else { 0.0 }
            }),
            FunctionSpec::Bump => GridFunction::from_fn(cube, n, |x| {
                let rho2: f64 = x
                    .iter()
                    .zip(center.iter())
                    .map(|(a, c)| ((a - c) / (0.5 * side)).powi(2))
                    .sum();
                if rho2 < 1.0 {
                    (1.0 - 1.0 / (1.0 - rho2)).exp()
                } else {
                    0.0
                }
            }),
            FunctionSpec::Transition { eps } => {
                if eps.is_nan() || *eps <= 0.0 {
                    return Err(param(format!(
                        "transition width must be positive, got {eps}"
                    )));
                }
                GridFunction::from_fn(cube, n, |x| profile((x[0] - center[0]) / eps))
            }
            FunctionSpec::Trig { seed, modes } => {
                let d = cube.dim();
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let terms: Vec<([f64; 2], f64, f64)> = (0..*modes)
                    .map(|_| {
                        let mut k = [0.0; 2];
                        for a in k.iter_mut().take(d) {
                            *a = rng.gen_range(0..=*modes as i64) as f64;
                        }
                        if k.iter().all(|v| *v == 0.0) {
                            k[0] = 1.0;
                        }
                        let size = k.iter().map(|v| v.abs()).fold(0.0, f64::max);
                        let amp = rng.gen_range(-1.0..1.0) / size;
                        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                        (k, amp, phase)
                    })
                    .collect();
                GridFunction::from_fn(cube, n, |x| {
                    terms
                        .iter()
                        .map(|(k, amp, phase)| {
                            let arg: f64 = (0..d).map(|a| k[a] * (x[a] - o[a]) / side).sum();
                            amp * (std::f64::consts::TAU * arg + phase).cos()
                        })
                        .sum()
                })
            }
        }
    }
}

/// Two-weight pairs `(ω, σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightSpec {
    Constant,
    /// `ω` jumps from 1 to `ratio`, `σ` from `ratio` to 1, across the center.
    Step {
        ratio: f64,
    },
    /// `(|x−c|^{−γ₁d}, |x−c|^{γ₂d})` with `c` the center; admissible when
    /// `γ₁ < 1/q`, `γ₂ < 1/p′` and `γ₁ + γ₂ ≤ α`.
    PowerPair {
        gamma1: f64,
        gamma2: f64,
    },
    /// `(w^{1/q}, w^{1/p})` for a one-weight example.
    FromOne(OneWeightSpec),
}

/// Single weights `w` for the one-weight corollaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OneWeightSpec {
    Constant,
    /// 1 left of the center, `ratio` right of it.
    Step {
        ratio: f64,
    },
    /// `|x − c|^exponent` with `c` the center; in `A_u` iff
    /// `−d < exponent < d(u − 1)` (`≤ 0` when `u = 1`).
    Power {
        exponent: f64,
    },
}

impl OneWeightSpec {
    pub fn label(&self) -> String {
        match self {
            OneWeightSpec::Constant => "w1".into(),
            OneWeightSpec::Step { ratio } => format!("wstep{ratio}"),
            OneWeightSpec::Power { exponent } => format!("wpow{exponent}"),
        }
    }

    pub fn sample(&self, cube: Cube, n: usize) -> Result<GridFunction> {
        let c = cube.center();
        match self {
            OneWeightSpec::Constant => GridFunction::constant(cube, n, 1.0),
            OneWeightSpec::Step { ratio } => step(cube, n, c[0], 1.0, *ratio),
            OneWeightSpec::Power { exponent } => power_law(cube, n, &c[..cube.dim()], *exponent),
        }
    }

    /// Whether the weight belongs to `A_u` in the continuum.
    pub fn in_class(&self, d: usize, u: f64) -> bool {
        match self {
            OneWeightSpec::Power { exponent } => {
                let d = d as f64;
                *exponent > -d && (*exponent < d * (u - 1.0) || (*exponent == 0.0))
            }
            OneWeightSpec::Step { ratio } => *ratio > 0.0,
            OneWeightSpec::Constant => true,
        }
    }
}

impl WeightSpec {
    pub fn label(&self) -> String {
        match self {
            WeightSpec::Constant => "const".into(),
            WeightSpec::Step { ratio } => format!("step{ratio}"),
            WeightSpec::PowerPair { gamma1, gamma2 } => format!("pow{gamma1}_{gamma2}"),
            WeightSpec::FromOne(w) => format!("one_{}", w.label()),
        }
    }

    /// Whether the continuum pair lies in `A^α_{p,q}` with the exponents of `cfg`.
    pub fn in_class(&self, cfg: &ExponentConfig) -> bool {
        match self {
            WeightSpec::Constant | WeightSpec::Step { .. } => true,
            WeightSpec::PowerPair { gamma1, gamma2 } => {
                *gamma1 >= 0.0
                    && *gamma1 < 1.0 / cfg.q
                    && *gamma2 >= 0.0
                    && (*gamma2 < inv_conjugate(cfg.p) || *gamma2 == 0.0)
                    && gamma1 + gamma2 <= cfg.alpha + 1e-12
            }
            WeightSpec::FromOne(w) => {
                w.in_class(cfg.d, cfg.u)
                    && cfg.alpha + 1e-12 >= (cfg.u - 1.0) * (1.0 / cfg.p - 1.0 / cfg.q)
            }
        }
    }

    pub fn sample(
        &self,
        cube: Cube,
        n: usize,
        cfg: &ExponentConfig,
    ) -> Result<(GridFunction, GridFunction)> {
        let c = cube.center();
        match self {
            WeightSpec::Constant => {
                let one = GridFunction::constant(cube, n, 1.0)?;
                Ok((one.clone(), one))
            }
            WeightSpec::Step { ratio } => Ok((
                step(cube, n, c[0], 1.0, *ratio)?,
                step(cube, n, c[0], *ratio, 1.0)?,
            )),
            WeightSpec::PowerPair { gamma1, gamma2 } => {
                power_pair(cube, n, &c[..cube.dim()], *gamma1, *gamma2)
            }
            WeightSpec::FromOne(w) => {
                let w = w.sample(cube, n)?;
                Ok((
                    w.map(|v| v.powf(1.0 / cfg.q)),
                    w.map(|v| v.powf(1.0 / cfg.p)),
                ))
            }
        }
    }
}

/// Seeded functions and weights on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub cube: Cube,
    pub n: usize,
    pub depth: u32,
    pub seed: u64,
    pub functions: Vec<FunctionSpec>,
    pub weights: Vec<WeightSpec>,
    pub one_weights: Vec<OneWeightSpec>,
}

pub struct WeightPair {
    pub label: String,
    pub omega: GridFunction,
    pub sigma: GridFunction,
}

pub struct OneWeight {
    pub spec: OneWeightSpec,
    pub label: String,
    pub w: GridFunction,
}

impl TestSuite {
    /// Affine, bump and `trig_count` seeded trigonometric polynomials on
    /// the unit cube, with constant, step and power weights.
    pub fn smooth(d: usize, n: usize, depth: u32, seed: u64, trig_count: u64) -> Self {
        let mut functions = vec![FunctionSpec::Affine, FunctionSpec::Bump];
        functions.extend((0..trig_count).map(|i| FunctionSpec::Trig {
            seed: seed.wrapping_add(i),
            modes: 3,
        }));
        Self {
            cube: Cube::unit(d),
            n,
            depth,
            seed,
            functions,
            weights: vec![
                WeightSpec::Constant,
                WeightSpec::Step { ratio: 4.0 },
                WeightSpec::PowerPair {
                    gamma1: 0.1,
                    gamma2: 0.0,
                },
                WeightSpec::PowerPair {
                    gamma1: 0.05,
                    gamma2: 0.1,
                },
            ],
            one_weights: vec![
                OneWeightSpec::Constant,
                OneWeightSpec::Step { ratio: 4.0 },
                OneWeightSpec::Power {
                    exponent: -0.3 * d as f64,
                },
                OneWeightSpec::Power {
                    exponent: 0.4 * d as f64,
                },
            ],
        }
    }

    /// The smooth suite plus a sharp transition.
    pub fn standard(d: usize, n: usize, depth: u32, seed: u64, trig_count: u64) -> Self {
        let mut suite = Self::smooth(d, n, depth, seed, trig_count);
        suite
            .functions
            .push(FunctionSpec::Transition { eps: 1.0 / 16.0 });
        suite
    }

    pub fn check(&self, cfg: &ExponentConfig) -> Result<()> {
        cfg.validate()?;
        if cfg.d != self.cube.dim() {
            return Err(param(format!(
                "configuration has d = {} but the suite lives in dimension {}",
                cfg.d,
                self.cube.dim()
            )));
        }
        if !self.n.is_power_of_two() || 1usize << self.depth > self.n {
            return Err(param(format!(
                "depth {} does not fit a grid with n = {}",
                self.depth, self.n
            )));
        }
        Ok(())
    }

    pub fn sample_functions(&self) -> Result<Vec<(String, GridFunction)>> {
        self.functions
            .iter()
            .map(|f| Ok((f.label(), f.sample(self.cube, self.n)?)))
            .collect()
    }

    /// Pairs in `A^α_{p,q}` whose dyadic characteristic stays below
    /// [`CHARACTERISTIC_CAP`].
    pub fn weight_pairs(&self, cfg: &ExponentConfig) -> Result<Vec<WeightPair>> {
        let mut out = Vec::new();
        for spec in self.weights.iter().filter(|w| w.in_class(cfg)) {
            let (omega, sigma) = spec.sample(self.cube, self.n, cfg)?;
            if apq_alpha(&omega, &sigma, cfg, self.depth)?.value <= CHARACTERISTIC_CAP {
                out.push(WeightPair {
                    label: spec.label(),
                    omega,
                    sigma,
                });
            }
        }
        Ok(out)
    }

    /// One-weight examples in `A_u` with `[w]_{A_u}` below the cap.
    pub fn one_weight_family(&self, cfg: &ExponentConfig) -> Result<Vec<OneWeight>> {
        let mut out = Vec::new();
        for spec in self.one_weights.iter().filter(|w| w.in_class(cfg.d, cfg.u)) {
            let w = spec.sample(self.cube, self.n)?;
            if au_characteristic(&w, cfg.u, self.depth)?.value <= CHARACTERISTIC_CAP {
                out.push(OneWeight {
                    spec: spec.clone(),
                    label: spec.label(),
                    w,
                });
            }
        }
        Ok(out)
    }
}
