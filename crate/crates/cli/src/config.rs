//! The flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sandwich_core::norms::Quadrature;
use sandwich_core::sparse::DominatorForm;
use sandwich_core::verify::{sharpness_guard, EmbeddingBranch, FractionalBranch};
use sandwich_core::weights::ExponentConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: cannot parse {value:?} ({expected})")]
    Value {
        key: String,
        value: String,
        expected: String,
    },
    #[error("{0}")]
    Constraint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Characteristics,
    Seminorm,
    Sparse,
    Verify,
    Sharpness,
    Bbm,
    Truncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Smooth,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theorem {
    PoincareSobolev,
    Fractional(FractionalBranch),
    Embedding(EmbeddingBranch),
    EmbeddingRelaxed,
    DyadicSumming { eps: f64, gamma: u32 },
    OneWeight,
    Shipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparseKind {
    Oscillation,
    Fractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Classic,
    Fractional,
}

/// Everything one invocation of `sandwich run` needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub cfg: ExponentConfig,
    pub n: usize,
    pub depth: u32,
    pub seed: u64,
    pub suite: SuiteKind,
    pub trig: u64,
    /// `None` keeps every suite function.
    pub function: Option<String>,
    /// `None` keeps every suite weight.
    pub weight: Option<String>,
    pub theorem: Theorem,
    pub s_grid: Vec<f64>,
    pub quadrature: Quadrature,
    pub sparse_kind: SparseKind,
    pub form: DominatorForm,
    pub pipeline: Pipeline,
    pub c_weak: Option<f64>,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub families: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "command",
    "d",
    "p",
    "q",
    "r",
    "s",
    "alpha",
    "u",
    "p0",
    "n",
    "depth",
    "seed",
    "suite",
    "trig",
    "f",
    "weight",
    "theorem",
    "branch",
    "eps",
    "gamma",
    "s_grid",
    "quadrature",
    "sparse",
    "form",
    "pipeline",
    "c_weak",
    "csv",
    "json",
    "families",
];

/// Splits the text into key/value pairs; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::Duplicate {
                line: i + 1,
                key: k.to_string(),
            });
        }
    }
    let unknown: Vec<String> = out
        .keys()
        .filter(|k| !KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }
    Ok(out)
}

struct Pairs(BTreeMap<String, String>);

impl Pairs {
    fn get<T: std::str::FromStr>(
        &self,
        key: &str,
        expected: &str,
    ) -> Result<Option<T>, ConfigError> {
        self.0
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| ConfigError::Value {
                    key: key.into(),
                    value: v.clone(),
                    expected: expected.into(),
                })
            })
            .transpose()
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key, "a real number")
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>, ConfigError> {
        self.0
            .get(key)
            .map(|v| {
                options
                    .iter()
                    .find(|(name, _)| name == v)
                    .map(|(_, t)| *t)
                    .ok_or_else(|| ConfigError::Value {
                        key: key.into(),
                        value: v.clone(),
                        expected: format!(
                            "one of {}",
                            options
                                .iter()
                                .map(|(n, _)| *n)
                                .collect::<Vec<_>>()
                                .join(", ")
                        ),
                    })
            })
            .transpose()
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn resolve(base: &Path, value: Option<&str>, default: PathBuf) -> PathBuf {
    match value {
        Some(v) if Path::new(v).is_absolute() => PathBuf::from(v),
        Some(v) => base.join(v),
        None => default,
    }
}

impl ExperimentConfig {
    /// Parses and validates a configuration read from `path`. Relative
    /// output paths are taken relative to the configuration's directory.
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let pairs = Pairs(parse_pairs(text)?);
        let command = pairs
            .choice(
                "command",
                &[
                    ("characteristics", Command::Characteristics),
                    ("seminorm", Command::Seminorm),
                    ("sparse", Command::Sparse),
                    ("verify", Command::Verify),
                    ("sharpness", Command::Sharpness),
                    ("bbm", Command::Bbm),
                    ("truncation", Command::Truncation),
                ],
            )?
            .ok_or(ConfigError::Missing("command"))?;

        let d: usize = pairs.get("d", "1 or 2")?.unwrap_or(1);
        let q = pairs.real("q")?.unwrap_or(2.0);
        let p = pairs.real("p")?.unwrap_or(q.min(2.0));
        let mut cfg = ExponentConfig::new(d, p, q);
        cfg.r = pairs.real("r")?.unwrap_or(cfg.r);
        cfg.s = pairs.real("s")?.unwrap_or(cfg.s);
        cfg.alpha = pairs.real("alpha")?.unwrap_or(cfg.alpha);
        cfg.u = pairs.real("u")?.unwrap_or(cfg.u);
        cfg.p0 = pairs.real("p0")?.unwrap_or(cfg.p0);
        cfg.validate()
            .map_err(|e| ConfigError::Constraint(e.to_string()))?;

        let n: usize = pairs
            .get("n", "a power of two")?
            .unwrap_or(if d == 1 { 256 } else { 32 });
        if !n.is_power_of_two() || n < 2 {
            return Err(ConfigError::Constraint(format!(
                "n must be a power of two ≥ 2, got {n}"
            )));
        }
        let max_depth = n.trailing_zeros();
        let depth: u32 = pairs
            .get("depth", "a nonnegative integer")?
            .unwrap_or(max_depth.min(6));
        if depth > max_depth {
            return Err(ConfigError::Constraint(format!(
                "depth {depth} exceeds log2(n) = {max_depth}"
            )));
        }

        let theorem = match pairs.text("theorem") {
            None if command == Command::Verify => return Err(ConfigError::Missing("theorem")),
            None => Theorem::Shipped,
            Some(t) => parse_theorem(t, &pairs)?,
        };

        let s_grid = match pairs.text("s_grid") {
            Some(list) => list
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| ConfigError::Value {
                        key: "s_grid".into(),
                        value: list.into(),
                        expected: "comma-separated reals".into(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![cfg.s],
        };
        if s_grid.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
            return Err(ConfigError::Constraint(format!(
                "requires 0 < s < 1 for every s_grid entry, got {s_grid:?}"
            )));
        }
        if command == Command::Sharpness {
            for &s in &s_grid {
                sharpness_guard(cfg.q, s, n).map_err(|e| ConfigError::Constraint(e.to_string()))?;
            }
        }

        let stem = path.with_extension("");
        let base = path.parent().unwrap_or(Path::new("."));
        let with_ext = |ext: &str| {
            let mut s = stem.clone().into_os_string();
            s.push(ext);
            PathBuf::from(s)
        };
        Ok(Self {
            command,
            cfg,
            n,
            depth,
            seed: pairs.get("seed", "an unsigned integer")?.unwrap_or(0),
            suite: pairs
                .choice(
                    "suite",
                    &[
                        ("smooth", SuiteKind::Smooth),
                        ("standard", SuiteKind::Standard),
                    ],
                )?
                .unwrap_or(SuiteKind::Smooth),
            trig: pairs.get("trig", "an unsigned integer")?.unwrap_or(2),
            function: selection(
                pairs.text("f"),
                &["affine", "bump", "trig", "transition"],
                "f",
            )?,
            weight: selection(
                pairs.text("weight"),
                &["const", "step", "power", "power_pair"],
                "weight",
            )?,
            theorem,
            s_grid,
            quadrature: pairs
                .choice(
                    "quadrature",
                    &[
                        ("cell", Quadrature::CellIntegrated),
                        ("midpoint", Quadrature::Midpoint),
                    ],
                )?
                .unwrap_or_default(),
            sparse_kind: pairs
                .choice(
                    "sparse",
                    &[
                        ("oscillation", SparseKind::Oscillation),
                        ("fractional", SparseKind::Fractional),
                    ],
                )?
                .unwrap_or(SparseKind::Fractional),
            form: pairs
                .choice(
                    "form",
                    &[
                        ("theorem", DominatorForm::Theorem),
                        ("intermediate", DominatorForm::Intermediate),
                    ],
                )?
                .unwrap_or_default(),
            pipeline: pairs
                .choice(
                    "pipeline",
                    &[
                        ("classic", Pipeline::Classic),
                        ("fractional", Pipeline::Fractional),
                    ],
                )?
                .unwrap_or(Pipeline::Classic),
            c_weak: pairs.real("c_weak")?,
            csv: resolve(base, pairs.text("csv"), with_ext(".csv")),
            json: resolve(base, pairs.text("json"), with_ext(".json")),
            families: pairs
                .text("families")
                .map(|v| resolve(base, Some(v), PathBuf::new())),
        })
    }
}

fn selection(
    value: Option<&str>,
    options: &[&str],
    key: &str,
) -> Result<Option<String>, ConfigError> {
    match value {
        None | Some("suite") => Ok(None),
        Some(v) if options.contains(&v) => Ok(Some(v.to_string())),
        Some(v) => Err(ConfigError::Value {
            key: key.into(),
            value: v.into(),
            expected: format!("suite or one of {}", options.join(", ")),
        }),
    }
}

fn parse_theorem(name: &str, pairs: &Pairs) -> Result<Theorem, ConfigError> {
    let branch = pairs.text("branch");
    let bad_branch = |allowed: &str| ConfigError::Value {
        key: "branch".into(),
        value: branch.unwrap_or_default().into(),
        expected: format!("one of {allowed}"),
    };
    Ok(match name {
        "poincare_sobolev" => Theorem::PoincareSobolev,
        "fractional_ps" => Theorem::Fractional(match branch.unwrap_or("i") {
            "i" => FractionalBranch::Subcritical,
            "ii" => FractionalBranch::CriticalI,
            "iii" => FractionalBranch::CriticalII,
            _ => return Err(bad_branch("i, ii, iii")),
        }),
        "embedding" => match branch.unwrap_or("i") {
            "i" => Theorem::Embedding(EmbeddingBranch::Subcritical),
            "ii" => Theorem::Embedding(EmbeddingBranch::Critical),
            "relaxed" => Theorem::EmbeddingRelaxed,
            _ => return Err(bad_branch("i, ii, relaxed")),
        },
        "dyadic_summing" => Theorem::DyadicSumming {
            eps: pairs.real("eps")?.ok_or(ConfigError::Missing("eps"))?,
            gamma: pairs.get("gamma", "1 or 3")?.unwrap_or(1),
        },
        "one_weight" => Theorem::OneWeight,
        "shipped" => Theorem::Shipped,
        other => {
            return Err(ConfigError::Value {
                key: "theorem".into(),
                value: other.into(),
                expected: "one of poincare_sobolev, fractional_ps, embedding, dyadic_summing, one_weight, shipped"
                    .into(),
            })
        }
    })
}
