use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::one_weight::one_weight_suite;
use super::report::VerificationReport;
use super::suite::TestSuite;
use super::theorems::{
    check_dyadic_summing, check_embedding, check_fractional_ps, check_poincare_sobolev,
    EmbeddingBranch, FractionalBranch,
};
use crate::error::Result;
use crate::weights::ExponentConfig;

/// Acceptance allows this factor above the calibrated ratio.
pub const REFERENCE_MARGIN: f64 = 1.25;

pub const SHIPPED_SEED: u64 = 2024;

/// Largest ratio per experiment and dimension over the shipped runs,
/// rounded up to four significant digits.
const CALIBRATION: &[(&str, usize, f64)] = &[
    ("dyadic_summing.g1", 1, 1.596),
    ("dyadic_summing.g1", 2, 0.9737),
    ("dyadic_summing.g3", 1, 2.785),
    ("dyadic_summing.g3", 2, 2.941),
    ("embedding.i", 1, 1.334),
    ("embedding.i", 2, 0.3049),
    ("embedding.i_ainfty", 1, 0.7072),
    ("embedding.i_ainfty", 2, 0.5455),
    ("embedding.ii", 1, 0.1251),
    ("embedding.ii", 2, 0.1535),
    ("fractional_ps.i", 1, 0.2324),
    ("fractional_ps.i", 2, 0.08365),
    ("fractional_ps.ii", 1, 0.4729),
    ("fractional_ps.ii", 2, 0.4067),
    ("fractional_ps.iii", 1, 0.2451),
    ("fractional_ps.iii", 2, 0.2034),
    ("one_weight.embedding", 1, 1.334),
    ("one_weight.embedding", 2, 0.4979),
    ("one_weight.fractional", 1, 0.4455),
    ("one_weight.fractional", 2, 0.05673),
    ("one_weight.poincare", 1, 0.3150),
    ("one_weight.poincare", 2, 0.2886),
    ("poincare_sobolev.i", 1, 0.2887),
    ("poincare_sobolev.i", 2, 0.1443),
    ("poincare_sobolev.ii", 2, 0.3233),
];

/// `REFERENCE_MARGIN` times the calibrated ratio, if one is stored.
pub fn reference(base_id: &str, d: usize) -> Option<f64> {
    CALIBRATION
        .iter()
        .find(|(id, dim, _)| *id == base_id && *dim == d)
        .map(|(_, _, c)| REFERENCE_MARGIN * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RunKind {
    PoincareSobolev,
    Fractional(FractionalBranch),
    Embedding(EmbeddingBranch),
    DyadicSumming { eps: f64, gamma: u32 },
    OneWeight,
}

impl RunKind {
    pub fn run(&self, suite: &TestSuite, cfg: &ExponentConfig) -> Result<Vec<VerificationReport>> {
        match *self {
            RunKind::PoincareSobolev => check_poincare_sobolev(suite, cfg),
            RunKind::Fractional(b) => check_fractional_ps(suite, cfg, b),
            RunKind::Embedding(b) => check_embedding(suite, cfg, b),
            RunKind::DyadicSumming { eps, gamma } => check_dyadic_summing(suite, cfg, eps, gamma),
            RunKind::OneWeight => one_weight_suite(suite, cfg),
        }
    }
}

/// The grid used by the shipped runs in dimension `d`.
pub fn shipped_suite(d: usize) -> TestSuite {
    if d == 1 {
        TestSuite::smooth(1, 256, 8, SHIPPED_SEED, 3)
    } else {
        TestSuite::smooth(2, 32, 5, SHIPPED_SEED, 2)
    }
}

fn cfg(d: usize, p: f64, q: f64) -> ExponentConfig {
    ExponentConfig::new(d, p, q)
}

/// The parameter choices behind the stored references.
pub fn shipped_runs() -> Vec<(RunKind, ExponentConfig)> {
    use EmbeddingBranch as E;
    use FractionalBranch as F;
    let mut runs = vec![
        (RunKind::PoincareSobolev, cfg(1, 2.0, 2.0)),
        (RunKind::PoincareSobolev, cfg(1, 1.0, 2.0).with_alpha(0.1)),
        (RunKind::PoincareSobolev, cfg(1, 1.5, 3.0).with_alpha(0.2)),
        (RunKind::PoincareSobolev, cfg(2, 2.0, 2.0)),
        (RunKind::PoincareSobolev, cfg(2, 1.5, 2.0).with_alpha(0.1)),
        (RunKind::PoincareSobolev, cfg(2, 1.0, 2.0)),
        (
            RunKind::PoincareSobolev,
            cfg(2, 1.5, 3.0).with_alpha(1.0 / 6.0),
        ),
        (
            RunKind::Fractional(F::Subcritical),
            cfg(1, 1.0, 1.0).with_r(1.0),
        ),
        (
            RunKind::Fractional(F::Subcritical),
            cfg(1, 2.0, 2.0).with_s(0.6),
        ),
        (
            RunKind::Fractional(F::Subcritical),
            cfg(1, 2.0, 2.0).with_r(1.0).with_alpha(0.1),
        ),
        (RunKind::Fractional(F::Subcritical), cfg(2, 2.0, 2.0)),
        (
            RunKind::Fractional(F::CriticalI),
            cfg(1, 2.0, 4.0).with_alpha(0.25),
        ),
        (
            RunKind::Fractional(F::CriticalII),
            cfg(1, 2.0, 4.0).with_alpha(0.25),
        ),
        (
            RunKind::Fractional(F::CriticalI),
            cfg(1, 2.0, 2.0).with_r(1.0).with_s(0.3).with_alpha(0.3),
        ),
        (
            RunKind::Fractional(F::CriticalII),
            cfg(1, 2.0, 2.0).with_r(1.0).with_s(0.3).with_alpha(0.3),
        ),
        (RunKind::Fractional(F::CriticalI), cfg(2, 2.0, 4.0)),
        (RunKind::Fractional(F::CriticalII), cfg(2, 2.0, 4.0)),
        (
            RunKind::Embedding(E::Subcritical),
            cfg(1, 1.0, 1.0).with_r(1.0),
        ),
        (
            RunKind::Embedding(E::Subcritical),
            cfg(1, 2.0, 2.0).with_p0(1.5),
        ),
        (
            RunKind::Embedding(E::Subcritical),
            cfg(2, 2.0, 2.0).with_p0(2.0),
        ),
        (
            RunKind::Embedding(E::Subcritical),
            cfg(2, 2.0, 2.0).with_p0(1.5).with_alpha(0.05),
        ),
        (
            RunKind::Embedding(E::Critical),
            cfg(1, 2.0, 4.0).with_p0(1.5).with_alpha(0.25),
        ),
        (
            RunKind::Embedding(E::Critical),
            cfg(2, 2.0, 4.0).with_p0(1.5),
        ),
        (
            RunKind::OneWeight,
            cfg(1, 2.0, 2.0).with_u(1.5).with_p0(1.5),
        ),
        (RunKind::OneWeight, cfg(1, 1.0, 1.0).with_r(1.0)),
        (
            RunKind::OneWeight,
            cfg(1, 2.0, 3.0).with_u(1.2).with_p0(1.2),
        ),
        (
            RunKind::OneWeight,
            cfg(2, 2.0, 2.0).with_u(1.5).with_p0(1.5),
        ),
    ];
    for d in [1, 2] {
        for gamma in [1, 3] {
            runs.push((RunKind::DyadicSumming { eps: 0.5, gamma }, cfg(d, 2.0, 2.0)));
            runs.push((
                RunKind::DyadicSumming { eps: 0.25, gamma },
                cfg(d, 1.5, 3.0).with_alpha(0.1),
            ));
        }
    }
    runs
}

/// Every shipped run, in list order.
pub fn run_shipped() -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let suites = [shipped_suite(1), shipped_suite(2)];
    for (kind, cfg) in shipped_runs() {
        out.extend(kind.run(&suites[cfg.d - 1], &cfg)?);
    }
    Ok(out)
}

/// Largest finite ratio per `(experiment, d)` among reports that carry a
/// verdict or would carry one once calibrated.
pub fn calibrate(reports: &[VerificationReport]) -> BTreeMap<(String, usize), f64> {
    let mut out: BTreeMap<(String, usize), f64> = BTreeMap::new();
    for r in reports {
        let e = out.entry((r.base_id().to_string(), r.cfg.d)).or_insert(0.0);
        *e = e.max(r.ratio);
    }
    out
}
