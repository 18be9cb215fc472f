use std::collections::BTreeMap;

use anyhow::Result;
use sandwich_core::norms::tl_seminorm_with;
use sandwich_core::sparse::{
    fractional_sparse_with, oscillation_sparse, sparsity_check, verify_fractional_domination_with,
    verify_oscillation_domination, SparseFamily,
};
use sandwich_core::truncation::{
    weak_to_strong_classic, weak_to_strong_fractional_with, TruncationGradient,
};
use sandwich_core::verify::{
    bbm_sweep, check_dyadic_summing, check_embedding_relaxed, check_embedding_with,
    check_fractional_ps_with, check_poincare_sobolev, one_weight_suite, run_shipped,
    sharpness_experiment, FunctionSpec, TestSuite, VerificationReport, WeightSpec,
};
use sandwich_core::weights::{ainfty, apq_alpha, au_characteristic};

use crate::config::{Command, ExperimentConfig, Pipeline, SparseKind, SuiteKind, Theorem};

/// Reports of one run plus the sparse families it built, keyed by function.
pub struct Outcome {
    pub reports: Vec<VerificationReport>,
    pub families: Vec<(String, SparseFamily)>,
}

fn function_spec(name: &str, seed: u64) -> FunctionSpec {
    match name {
        "affine" => FunctionSpec::Affine,
        "bump" => FunctionSpec::Bump,
        "trig" => FunctionSpec::Trig { seed, modes: 3 },
        _ => FunctionSpec::Transition { eps: 1.0 / 16.0 },
    }
}

fn weight_spec(name: &str) -> WeightSpec {
    match name {
        "const" => WeightSpec::Constant,
        "step" => WeightSpec::Step { ratio: 4.0 },
        "power" => WeightSpec::PowerPair {
            gamma1: 0.1,
            gamma2: 0.0,
        },
        _ => WeightSpec::PowerPair {
            gamma1: 0.05,
            gamma2: 0.1,
        },
    }
}

/// The suite selected by `suite`, `trig`, `f` and `weight`; `weight`
/// falls back to `default_weight` when absent.
pub fn build_suite(c: &ExperimentConfig, default_weight: Option<&str>) -> TestSuite {
    let mut suite = match c.suite {
        SuiteKind::Smooth => TestSuite::smooth(c.cfg.d, c.n, c.depth, c.seed, c.trig),
        SuiteKind::Standard => TestSuite::standard(c.cfg.d, c.n, c.depth, c.seed, c.trig),
    };
    if let Some(f) = &c.function {
        suite.functions = vec![function_spec(f, c.seed)];
    }
    if let Some(w) = c.weight.as_deref().or(default_weight) {
        suite.weights = vec![weight_spec(w)];
    }
    suite
}

fn measurement(c: &ExperimentConfig, id: String, value: f64) -> VerificationReport {
    VerificationReport::new(id, c.cfg, c.n, c.depth, c.seed, value, BTreeMap::new())
}

pub fn execute(c: &ExperimentConfig) -> Result<Outcome> {
    let mut families = Vec::new();
    let reports = match c.command {
        Command::Characteristics => characteristics(c)?,
        Command::Seminorm => seminorm(c)?,
        Command::Sparse => sparse(c, &mut families)?,
        Command::Verify => verify(c)?,
        Command::Sharpness => sharpness(c)?,
        Command::Bbm => bbm(c)?,
        Command::Truncation => truncation(c)?,
    };
    Ok(Outcome { reports, families })
}

fn characteristics(c: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let suite = build_suite(c, None);
    let mut out = Vec::new();
    for spec in suite.weights.iter().filter(|w| w.in_class(&c.cfg)) {
        let (omega, sigma) = spec.sample(suite.cube, suite.n, &c.cfg)?;
        let ch = apq_alpha(&omega, &sigma, &c.cfg, c.depth)?;
        out.push(
            measurement(c, format!("characteristics.apq:{}", spec.label()), ch.value)
                .diagnostic("attaining_generation", ch.attaining_cube.generation as f64),
        );
    }
    for spec in suite
        .one_weights
        .iter()
        .filter(|w| w.in_class(c.cfg.d, c.cfg.u))
    {
        let w = spec.sample(suite.cube, suite.n)?;
        let au = au_characteristic(&w, c.cfg.u, c.depth)?.value;
        out.push(measurement(
            c,
            format!("characteristics.au:{}", spec.label()),
            au,
        ));
        let ai = ainfty(&w, c.depth)?.value;
        out.push(measurement(
            c,
            format!("characteristics.ainfty:{}", spec.label()),
            ai,
        ));
    }
    Ok(out)
}

fn seminorm(c: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let suite = build_suite(c, Some("const"));
    let pairs = suite.weight_pairs(&c.cfg)?;
    let mut out = Vec::new();
    for (fname, f) in suite.sample_functions()? {
        for wp in &pairs {
            let v = tl_seminorm_with(&f, &wp.sigma, c.cfg.p, c.cfg.r, c.cfg.s, c.quadrature)?;
            out.push(measurement(
                c,
                format!("seminorm:{fname}:{}", wp.label),
                v.value,
            ));
        }
    }
    Ok(out)
}

fn sparse(
    c: &ExperimentConfig,
    families: &mut Vec<(String, SparseFamily)>,
) -> Result<Vec<VerificationReport>> {
    let suite = build_suite(c, None);
    let mut out = Vec::new();
    for (fname, f) in suite.sample_functions()? {
        let (kind, family, domination) = match c.sparse_kind {
            SparseKind::Oscillation => {
                let family = oscillation_sparse(&f, c.depth)?;
                let dom = verify_oscillation_domination(&f, &family)?;
                ("oscillation", family, dom)
            }
            SparseKind::Fractional => {
                let family = fractional_sparse_with(&f, c.cfg.r, c.cfg.s, c.quadrature, c.depth)?;
                let dom = verify_fractional_domination_with(
                    &f,
                    c.cfg.r,
                    c.cfg.s,
                    c.quadrature,
                    &family,
                    c.form,
                )?;
                ("fractional", family, dom)
            }
        };
        let (disjoint, min_fraction) = sparsity_check(&family);
        let mut parts = BTreeMap::new();
        parts.insert("min_witness_fraction".to_string(), min_fraction);
        let mut report = VerificationReport::new(
            format!("sparse.{kind}:{fname}"),
            c.cfg,
            c.n,
            c.depth,
            c.seed,
            0.5,
            parts,
        )
        .diagnostic("cubes", family.len() as f64)
        .diagnostic("max_required_constant", domination.max_required_constant)
        .with_reference(Some(1.0));
        report.pass = report.pass.map(|p| p && disjoint);
        out.push(report);
        families.push((fname, family));
    }
    Ok(out)
}

fn verify(c: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let suite = build_suite(c, None);
    Ok(match c.theorem {
        Theorem::PoincareSobolev => check_poincare_sobolev(&suite, &c.cfg)?,
        Theorem::Fractional(b) => check_fractional_ps_with(&suite, &c.cfg, b, c.quadrature)?,
        Theorem::Embedding(b) => check_embedding_with(&suite, &c.cfg, b, c.quadrature)?,
        Theorem::EmbeddingRelaxed => check_embedding_relaxed(&suite, &c.cfg)?,
        Theorem::DyadicSumming { eps, gamma } => check_dyadic_summing(&suite, &c.cfg, eps, gamma)?,
        Theorem::OneWeight => one_weight_suite(&suite, &c.cfg)?,
        Theorem::Shipped => run_shipped()?,
    })
}

fn sharpness(c: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let rows = sharpness_experiment(c.cfg.q, c.cfg.r, &c.s_grid, c.n, c.quadrature)?;
    Ok(rows
        .into_iter()
        .map(|row| {
            let mut cfg = c.cfg;
            cfg.s = row.s;
            VerificationReport::new(
                format!("sharpness:s{}", row.s),
                cfg,
                c.n,
                c.depth,
                c.seed,
                row.product_with_gap,
                BTreeMap::new(),
            )
            .diagnostic("eps", row.eps)
            .diagnostic("seminorm", row.seminorm)
            .diagnostic("grad_norm", row.grad_norm)
        })
        .collect())
}

fn bbm(c: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let suite = build_suite(c, Some("const"));
    let pairs = suite.weight_pairs(&c.cfg)?;
    let mut out = Vec::new();
    for (fname, f) in suite.sample_functions()? {
        for wp in &pairs {
            for row in bbm_sweep(&f, &wp.sigma, c.cfg.p, c.cfg.r, &c.s_grid, c.quadrature)? {
                let mut cfg = c.cfg;
                cfg.s = row.s;
                out.push(
                    VerificationReport::new(
                        format!("bbm:{fname}:{}:s{}", wp.label, row.s),
                        cfg,
                        c.n,
                        c.depth,
                        c.seed,
                        row.product,
                        BTreeMap::new(),
                    )
                    .diagnostic("seminorm", row.seminorm),
                );
            }
        }
    }
    Ok(out)
}

fn truncation(c: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    let suite = build_suite(c, None);
    let pairs = suite.weight_pairs(&c.cfg)?;
    let mut out = Vec::new();
    for (fname, f) in suite.sample_functions()? {
        for wp in &pairs {
            let (kind, o) = match c.pipeline {
                Pipeline::Classic => (
                    "classic",
                    weak_to_strong_classic(
                        &f,
                        &wp.omega,
                        &wp.sigma,
                        &c.cfg,
                        c.c_weak,
                        TruncationGradient::default(),
                    )?,
                ),
                Pipeline::Fractional => (
                    "fractional",
                    weak_to_strong_fractional_with(
                        &f,
                        &wp.omega,
                        &wp.sigma,
                        &c.cfg,
                        c.c_weak,
                        c.quadrature,
                    )?,
                ),
            };
            let mut parts = BTreeMap::new();
            parts.insert("bound".to_string(), o.bound);
            let report = VerificationReport::new(
                format!("truncation.{kind}:{fname}:{}", wp.label),
                c.cfg,
                c.n,
                c.depth,
                c.seed,
                o.strong,
                parts,
            )
            .diagnostic("c_weak", o.c_weak)
            .diagnostic("c_measured", o.c_measured)
            .diagnostic("levels", o.levels as f64)
            .with_reference(Some(1.0));
            out.push(report);
        }
    }
    Ok(out)
}
