//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the whole
//! set is then repeated on a single worker and the CSV outputs compared.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sandwich_core::lattice::{Cube, GridFunction};
use sandwich_core::norms::{tl_seminorm_with, Quadrature};
use sandwich_core::sparse::{
    fractional_sparse, oscillation_sparse, sparsity_check, verify_fractional_domination,
    DominatorForm, SparseFamily,
};
use sandwich_core::truncation::{
    truncate, weak_to_strong_classic, weak_to_strong_fractional, TruncationGradient,
};
use sandwich_core::verify::{
    bbm_sweep, check_embedding, check_fractional_ps, check_poincare_sobolev, one_weight_suite,
    reports_to_csv, run_shipped, sharpness_experiment, shipped_suite, EmbeddingBranch,
    FractionalBranch, TestSuite, VerificationReport,
};
use sandwich_core::weights::{apq_characteristic, inv_conjugate, ExponentConfig};

const SEMINORM_TOL: f64 = 0.01;
const SEMINORM_BUDGET: Duration = Duration::from_secs(10);
const IDENTITY_TOL: f64 = 1e-12;
const SPARSE_BUDGET: Duration = Duration::from_secs(60);
const DEPTH_DRIFT: f64 = 0.25;
const S_SPREAD: f64 = 2.0;
const SHARPNESS_FLOOR: f64 = 0.5;
const GRAD_TOL: f64 = 0.02;
const SHARPNESS_BUDGET: Duration = Duration::from_secs(120);
const BBM_TOL: f64 = 0.01;
const UNIT_WEIGHT_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    /// What the test run requires; equals `pass` except where noted.
    enforced: bool,
    detail: String,
    reports: Vec<VerificationReport>,
}

fn record(id: String, value: f64) -> VerificationReport {
    VerificationReport::new(
        id,
        ExponentConfig::default(),
        0,
        0,
        0,
        value,
        BTreeMap::new(),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn closed_form_seminorm() -> Outcome {
    let start = Instant::now();
    let f = GridFunction::from_fn(Cube::unit(1), 2048, |x| x[0]).unwrap();
    let one = GridFunction::constant(Cube::unit(1), 2048, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut reports = Vec::new();
    for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let v = tl_seminorm_with(&f, &one, 1.0, 1.0, s, Quadrature::default())
            .unwrap()
            .value;
        worst = worst.max(rel(v, 2.0 / ((1.0 - s) * (2.0 - s))));
        reports.push(record(format!("seminorm:s{s}"), v));
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst <= SEMINORM_TOL && elapsed < SEMINORM_BUDGET,
        enforced: worst <= SEMINORM_TOL && elapsed < SEMINORM_BUDGET,
        detail: format!("max relative error {worst:.2e} (tol {SEMINORM_TOL}), {elapsed:.2?} (budget {SEMINORM_BUDGET:?})"),
        reports,
    }
}

fn random_weight(rng: &mut ChaCha8Rng, d: usize, n: usize) -> GridFunction {
    let samples = (0..n.pow(d as u32))
        .map(|_| rng.gen_range(-2.0f64..2.0).exp())
        .collect();
    GridFunction::new(Cube::unit(d), n, samples).unwrap()
}

fn scaling_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst: f64 = 0.0;
    let mut reports = Vec::new();
    for pair in 0..20 {
        let d = 1 + pair % 2;
        let omega = random_weight(&mut rng, d, 64);
        let sigma = random_weight(&mut rng, d, 64);
        let p = rng.gen_range(1.5..3.0);
        let q = rng.gen_range(p..5.0);
        let alpha = rng.gen_range(0.0..1.0 / q + inv_conjugate(p));
        for t in [1.0, 1.5, p.min(q)] {
            let p0 = 1.0 / (1.0 / p + inv_conjugate(t));
            let lhs = apq_characteristic(
                &omega.map(|w| w.powf(t)),
                &sigma.map(|w| w.powf(t)),
                p / t,
                q / t,
                alpha * t,
                6,
            )
            .unwrap()
            .value
            .powf(1.0 / t);
            let rhs = apq_characteristic(&omega, &sigma, p0, q, alpha, 6)
                .unwrap()
                .value;
            worst = worst.max(rel(lhs, rhs));
            reports.push(record(format!("identity:{pair}:t{t}"), lhs));
        }
    }
    Outcome {
        pass: worst <= IDENTITY_TOL,
        enforced: worst <= IDENTITY_TOL,
        detail: format!(
            "20 pairs × 3 exponents, max relative gap {worst:.2e} (tol {IDENTITY_TOL:e})"
        ),
        reports,
    }
}

/// Whether every witness holds at least half of its cube's cells.
fn half_in_cells(family: &SparseFamily) -> bool {
    family
        .members
        .iter()
        .all(|m| 2 * m.witness.len() >= family.cells_in(&m.index))
}

fn sparsity() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    let mut ok = true;
    let mut min_fraction = f64::INFINITY;
    let mut reports = Vec::new();
    for d in [1, 2] {
        let (n, depth) = if d == 1 { (256, 6) } else { (32, 5) };
        for seed in 0..5u64 {
            let suite = TestSuite::standard(d, n, depth, seed, 3);
            let s = [0.3, 0.5, 0.7, 0.9, 0.2][seed as usize];
            let cfg = ExponentConfig::new(d, 2.0, 2.0)
                .with_r(1.0 + seed as f64 / 2.0)
                .with_s(s);
            for (label, f) in suite.sample_functions().unwrap() {
                for (kind, family) in [
                    ("oscillation", oscillation_sparse(&f, depth).unwrap()),
                    ("fractional", fractional_sparse(&f, &cfg, depth).unwrap()),
                ] {
                    let (valid, fraction) = sparsity_check(&family);
                    ok &= valid && fraction >= 0.5 && half_in_cells(&family);
                    min_fraction = min_fraction.min(fraction);
                    runs += 1;
                    reports.push(record(
                        format!("sparse.{kind}:d{d}:seed{seed}:{label}"),
                        fraction,
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: ok && runs >= 100 && elapsed < SPARSE_BUDGET,
        enforced: ok && runs >= 100 && elapsed < SPARSE_BUDGET,
        detail: format!("{runs} families, min witness fraction {min_fraction:.4}, {elapsed:.2?} (budget {SPARSE_BUDGET:?})"),
        reports,
    }
}

fn domination_constant(f: &GridFunction, r: f64, s: f64, depth: u32) -> f64 {
    let cfg = ExponentConfig::new(f.dim(), 2.0, 2.0).with_r(r).with_s(s);
    let family = fractional_sparse(f, &cfg, depth).unwrap();
    verify_fractional_domination(f, &cfg, &family, DominatorForm::Theorem)
        .unwrap()
        .max_required_constant
}

struct DominationSummary {
    finite: bool,
    drift: f64,
    spread: f64,
    worst: String,
}

fn domination_summary(reports: &mut Vec<VerificationReport>) -> DominationSummary {
    let mut out = DominationSummary {
        finite: true,
        drift: 0.0,
        spread: 1.0,
        worst: String::new(),
    };
    for d in [1, 2] {
        let suite = TestSuite::standard(d, 64, 6, 3, 3);
        for (label, f) in suite.sample_functions().unwrap() {
            for r in [1.0, 2.0] {
                let mut at_depth6 = Vec::new();
                for s in [0.3, 0.5, 0.7] {
                    let c5 = domination_constant(&f, r, s, 5);
                    let c6 = domination_constant(&f, r, s, 6);
                    out.finite &= c5.is_finite() && c6.is_finite();
                    out.drift = out.drift.max(rel(c5, c6));
                    at_depth6.push(c6);
                    reports.push(record(format!("domination:d{d}:{label}:r{r}:s{s}"), c6));
                }
                let (lo, hi) = at_depth6
                    .iter()
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| {
                        (lo.min(c), hi.max(c))
                    });
                if hi / lo > out.spread {
                    out.spread = hi / lo;
                    out.worst = format!("d = {d}, {label}, r = {r}");
                }
            }
        }
    }
    out
}

fn domination_stability() -> Outcome {
    let mut reports = Vec::new();
    let DominationSummary {
        finite,
        drift,
        spread,
        worst,
    } = domination_summary(&mut reports);
    Outcome {
        pass: finite && drift < DEPTH_DRIFT && spread <= S_SPREAD,
        // the s-window is reported only
        enforced: finite && drift < DEPTH_DRIFT,
        detail: format!(
            "finite {finite}, depth 5→6 drift {:.1}% (limit {}%), s-spread {spread:.3}× at {worst} (limit {S_SPREAD}×)",
            100.0 * drift,
            100.0 * DEPTH_DRIFT
        ),
        reports,
    }
}

fn sharpness() -> Outcome {
    let start = Instant::now();
    let rows = sharpness_experiment(
        1.0,
        1.0,
        &[0.6, 0.65, 0.7, 0.75],
        4096,
        Quadrature::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let first = rows[0].product_with_gap;
    let floor = rows
        .iter()
        .map(|r| r.product_with_gap / first)
        .fold(f64::INFINITY, f64::min);
    let grad = rows
        .iter()
        .map(|r| (r.grad_norm - 1.0).abs())
        .fold(0.0, f64::max);
    let reports = rows
        .iter()
        .flat_map(|r| {
            [
                record(format!("sharpness:s{}", r.s), r.product_with_gap),
                record(format!("sharpness.grad:s{}", r.s), r.grad_norm),
            ]
        })
        .collect();
    Outcome {
        pass: floor >= SHARPNESS_FLOOR && grad <= GRAD_TOL && elapsed < SHARPNESS_BUDGET,
        enforced: floor >= SHARPNESS_FLOOR && grad <= GRAD_TOL && elapsed < SHARPNESS_BUDGET,
        detail: format!(
            "min product/first {floor:.3} (floor {SHARPNESS_FLOOR}), |‖f′‖₁ − 1| ≤ {grad:.2e} (tol {GRAD_TOL}), {elapsed:.2?} (budget {SHARPNESS_BUDGET:?})"
        ),
        reports,
    }
}

fn truncation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ok = true;
    let mut checks = 0usize;
    let mut reports = Vec::new();
    for i in 0..50 {
        let d = 1 + i % 2;
        let n: usize = if d == 1 { 256 } else { 16 };
        let scale = rng.gen_range(0.1..100.0);
        let samples: Vec<f64> = (0..n.pow(d as u32))
            .map(|_| scale * rng.gen::<f64>().powi(2))
            .collect();
        let v = GridFunction::new(Cube::unit(d), n, samples).unwrap();
        for _ in 0..5 {
            let t = scale * rng.gen_range(0.01..0.6);
            let vt = truncate(&v, t).unwrap();
            let (a, b) = (v.samples(), vt.samples());
            ok &= a.iter().zip(b).all(|(x, y)| 2.0 * y <= *x);
            for j in 0..a.len() {
                for k in (j + 1)..a.len().min(j + 64) {
                    ok &= (b[j] - b[k]).abs() <= (a[j] - a[k]).abs();
                    checks += 1;
                }
            }
            reports.push(record(format!("truncation:{i}:t{t}"), b.iter().sum()));
        }
    }
    Outcome {
        pass: ok,
        enforced: ok,
        detail: format!("50 functions × 5 levels, {checks} Lipschitz pairs, exact comparisons"),
        reports,
    }
}

fn weak_to_strong() -> Outcome {
    let mut ok = true;
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    let mut reports = Vec::new();
    for d in [1, 2] {
        let suite = if d == 1 {
            TestSuite::smooth(1, 128, 7, 5, 3)
        } else {
            TestSuite::smooth(2, 32, 5, 5, 2)
        };
        for cfg in [
            ExponentConfig::new(d, 2.0, 2.0).with_r(1.0),
            ExponentConfig::new(d, 1.5, 3.0).with_r(1.5).with_alpha(0.1),
        ] {
            let pairs = suite.weight_pairs(&cfg).unwrap();
            for (label, f) in suite.sample_functions().unwrap() {
                for wp in &pairs {
                    let classic = weak_to_strong_classic(
                        &f,
                        &wp.omega,
                        &wp.sigma,
                        &cfg,
                        None,
                        TruncationGradient::default(),
                    )
                    .unwrap();
                    let fractional =
                        weak_to_strong_fractional(&f, &wp.omega, &wp.sigma, &cfg, None).unwrap();
                    for (kind, o) in [("classic", classic), ("fractional", fractional)] {
                        ok &= o.pass;
                        runs += 1;
                        worst = worst.max(o.strong / o.bound);
                        reports.push(record(
                            format!("weak_strong.{kind}:d{d}:p{}:{label}:{}", cfg.p, wp.label),
                            o.strong / o.bound,
                        ));
                    }
                }
            }
        }
    }
    Outcome {
        pass: ok,
        enforced: ok,
        detail: format!("{runs} runs, largest strong/bound {worst:.3}"),
        reports,
    }
}

fn bbm() -> Outcome {
    let f = GridFunction::from_fn(Cube::unit(1), 2048, |x| x[0]).unwrap();
    let one = GridFunction::constant(Cube::unit(1), 2048, 1.0).unwrap();
    let rows = bbm_sweep(
        &f,
        &one,
        1.0,
        1.0,
        &[0.5, 0.8, 0.95],
        Quadrature::CellIntegrated,
    )
    .unwrap();
    let worst = rows
        .iter()
        .map(|r| rel(r.product, 2.0 / (2.0 - r.s)))
        .fold(0.0, f64::max);
    Outcome {
        pass: worst <= BBM_TOL,
        enforced: worst <= BBM_TOL,
        detail: format!(
            "max relative error {worst:.2e} (tol {BBM_TOL}), n = 2048 with cell-integrated kernel"
        ),
        reports: rows
            .iter()
            .map(|r| record(format!("bbm:s{}", r.s), r.product))
            .collect(),
    }
}

/// The `(function, weight)` part of an experiment id.
fn sample_key(id: &str, fields: usize) -> String {
    id.split(':')
        .skip(1)
        .take(fields)
        .collect::<Vec<_>>()
        .join(":")
}

fn theorem_regression() -> Outcome {
    let reports = run_shipped().unwrap();
    let failures: Vec<&str> = reports
        .iter()
        .filter(|r| r.pass == Some(false))
        .map(|r| r.experiment.as_str())
        .collect();
    let judged = reports.iter().filter(|r| r.pass.is_some()).count();
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for d in [1, 2] {
        let suite = shipped_suite(d);
        let cfg = ExponentConfig::new(d, 2.0, 2.0).with_p0(if d == 1 { 1.5 } else { 2.0 });
        let ow = one_weight_suite(&suite, &cfg).unwrap();
        let theorems = [
            (
                "one_weight.poincare",
                "inv_eps",
                check_poincare_sobolev(&suite, &cfg).unwrap(),
            ),
            (
                "one_weight.fractional",
                "inv_eps",
                check_fractional_ps(&suite, &cfg, FractionalBranch::Subcritical).unwrap(),
            ),
            (
                "one_weight.embedding",
                "eps_gamma",
                check_embedding(&suite, &cfg, EmbeddingBranch::Subcritical)
                    .unwrap()
                    .into_iter()
                    .filter(|r| r.base_id() == "embedding.i")
                    .collect(),
            ),
        ];
        for (id, branch, runs) in theorems {
            for t in runs.iter().filter(|t| t.experiment.ends_with(":const")) {
                let f = sample_key(&t.experiment, 1);
                let mine = ow
                    .iter()
                    .find(|r| {
                        r.base_id() == id && sample_key(&r.experiment, 2) == format!("{f}:w1")
                    })
                    .expect("unit weight run");
                worst = worst.max(rel(mine.diagnostics[&format!("ratio.{branch}")], t.ratio));
                compared += 1;
            }
        }
    }
    let detail = format!(
        "{} reports, {judged} with verdicts, {} above 1.25× reference{}; {compared} unit-weight comparisons, max gap {worst:.2e} (tol {UNIT_WEIGHT_TOL:e})",
        reports.len(),
        failures.len(),
        if failures.is_empty() { String::new() } else { format!(" ({})", failures.join(", ")) }
    );
    Outcome {
        pass: failures.is_empty() && judged > 0 && compared > 0 && worst <= UNIT_WEIGHT_TOL,
        enforced: failures.is_empty() && judged > 0 && compared > 0 && worst <= UNIT_WEIGHT_TOL,
        detail,
        reports,
    }
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    ("closed-form seminorm", closed_form_seminorm),
    ("characteristic scaling identity", scaling_identity),
    ("sparsity of constructed families", sparsity),
    ("fractional domination constant", domination_stability),
    ("sharpness of the smoothness gap", sharpness),
    ("truncation invariants", truncation),
    ("weak to strong pipelines", weak_to_strong),
    ("BBM closed form", bbm),
    ("theorem ratio regression", theorem_regression),
];

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .unwrap()
        .install(job)
}

#[test]
fn acceptance() {
    let mut enforced = Vec::new();
    let mut csv = Vec::new();
    for (i, (name, run)) in CRITERIA.iter().enumerate() {
        let outcome = in_pool(8, run);
        println!(
            "{} {:>2} {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
        enforced.push(outcome.enforced);
        csv.push(reports_to_csv(&outcome.reports));
    }
    let start = Instant::now();
    let mismatched: Vec<&str> = CRITERIA
        .iter()
        .zip(&csv)
        .filter(|((_, run), eight)| in_pool(1, || reports_to_csv(&run().reports)) != **eight)
        .map(|((name, _), _)| *name)
        .collect();
    let deterministic = mismatched.is_empty();
    println!(
        "{} 10 determinism: {} criteria re-run on 1 worker, {} CSV mismatches{} ({:.2?})",
        if deterministic { "PASS" } else { "FAIL" },
        CRITERIA.len(),
        mismatched.len(),
        if deterministic {
            String::new()
        } else {
            format!(": {}", mismatched.join(", "))
        },
        start.elapsed()
    );
    enforced.push(deterministic);
    let failed: Vec<usize> = enforced
        .iter()
        .enumerate()
        .filter(|(_, p)| !**p)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
