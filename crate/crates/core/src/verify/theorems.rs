use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::references::reference;
use super::report::VerificationReport;
use super::suite::TestSuite;
use crate::error::{param, Error, Result};
use crate::lattice::{pow, Extension, GridFunction, Pyramid};
use crate::norms::{gradient_norm, lp_norm, seminorm_from_inner, seminorm_inner, Quadrature};
use crate::sum::sum;
use crate::weights::{ainfty, apq_alpha, apq_characteristic, inv_conjugate, ExponentConfig, Gap};

/// `|ε|` below this counts as the critical case `ε = 0`.
pub const CRITICAL_TOL: f64 = 1e-12;

pub(crate) fn components(parts: &[(&str, f64)]) -> BTreeMap<String, f64> {
    parts.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub(crate) fn mean(f: &GridFunction) -> f64 {
    sum(f.samples().iter().copied()) / f.len() as f64
}

/// `‖f − ⟨f⟩_Q‖_{L^q_ω}`.
pub(crate) fn mean_deviation(f: &GridFunction, omega: &GridFunction, q: f64) -> Result<f64> {
    let m = mean(f);
    lp_norm(&f.map(|v| v - m), omega, q)
}

pub(crate) fn ainfty_of(w: &GridFunction, e: f64, depth: u32) -> Result<f64> {
    Ok(ainfty(&w.map(|v| v.powf(e)), depth)?.value)
}

pub(crate) fn finish(report: VerificationReport, pass_free: bool) -> VerificationReport {
    let d = report.cfg.d;
    let r = if pass_free {
        None
    } else {
        reference(report.base_id(), d)
    };
    report.with_reference(r)
}

/// `(ε, critical)` after checking the sign of `ε`.
fn classify(eps: f64) -> Result<bool> {
    if eps < -CRITICAL_TOL {
        return Err(Error::Hypothesis(format!("requires ε ≥ 0, got ε = {eps}")));
    }
    Ok(eps.abs() <= CRITICAL_TOL)
}

/// `[ω^q]_{A_∞}^{1/p′}` for `1 < p < q`, `[ω^q]_{A_∞}` otherwise.
fn omega_ainfty_power(
    omega: &GridFunction,
    cfg: &ExponentConfig,
    depth: u32,
) -> Result<(f64, f64)> {
    let a = ainfty_of(omega, cfg.q, depth)?;
    let e = if cfg.p > 1.0 && cfg.p < cfg.q {
        inv_conjugate(cfg.p)
    } else {
        1.0
    };
    Ok((a, a.powf(e)))
}

/// Gradient against `L^q_ω` deviation from the mean; the branch follows
/// the sign of `ε = 1/d − (1/p − 1/q) − α`.
pub fn check_poincare_sobolev(
    suite: &TestSuite,
    cfg: &ExponentConfig,
) -> Result<Vec<VerificationReport>> {
    suite.check(cfg)?;
    let eps = cfg.eps(Gap::One);
    let critical = classify(eps)?;
    let branch = if critical { "ii" } else { "i" };
    let volume = suite.cube.volume();
    let pairs = suite.weight_pairs(cfg)?;
    let mut out = Vec::new();
    for (fname, f) in suite.sample_functions()? {
        for wp in &pairs {
            let lhs = mean_deviation(&f, &wp.omega, cfg.q)?;
            let chr = apq_alpha(&wp.omega, &wp.sigma, cfg, suite.depth)?.value;
            let grad = gradient_norm(&f, &wp.sigma, cfg.p)?;
            let id = format!("poincare_sobolev.{branch}:{fname}:{}", wp.label);
            let mut report = if critical {
                let (a, power) = omega_ainfty_power(&wp.omega, cfg, suite.depth)?;
                VerificationReport::new(
                    id,
                    *cfg,
                    suite.n,
                    suite.depth,
                    suite.seed,
                    lhs,
                    components(&[
                        ("characteristic", chr),
                        ("ainfty_power", power),
                        ("gradient_norm", grad),
                    ]),
                )
                .diagnostic("ainfty_omega_q", a)
            } else {
                VerificationReport::new(
                    id,
                    *cfg,
                    suite.n,
                    suite.depth,
                    suite.seed,
                    lhs,
                    components(&[
                        ("characteristic", chr),
                        ("eps_factor", pow(volume, eps) / eps),
                        ("gradient_norm", grad),
                    ]),
                )
            };
            report = report.diagnostic("eps", eps);
            out.push(finish(report, false));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FractionalBranch {
    Subcritical,
    /// `ε = 0`, `p ≥ r`, `ω^q ∈ A_∞`.
    CriticalI,
    /// `ε = 0`, `p > 1`, `ω^q, σ^{−p′} ∈ A_∞`.
    CriticalII,
}

impl FractionalBranch {
    fn tag(self) -> &'static str {
        match self {
            FractionalBranch::Subcritical => "i",
            FractionalBranch::CriticalI => "ii",
            FractionalBranch::CriticalII => "iii",
        }
    }
}

fn check_fractional_hypotheses(
    cfg: &ExponentConfig,
    branch: FractionalBranch,
    eps: f64,
) -> Result<()> {
    let critical = classify(eps)?;
    if branch == FractionalBranch::Subcritical {
        if critical {
            return Err(Error::Hypothesis(
                "the subcritical branch needs ε > 0".into(),
            ));
        }
        return Ok(());
    }
    if !critical {
        return Err(Error::Hypothesis(format!(
            "critical branches need ε = 0, got ε = {eps}"
        )));
    }
    if cfg.p == 1.0 && cfg.r > 1.0 {
        return Err(Error::Hypothesis(
            "neither critical branch covers p = 1 < r".into(),
        ));
    }
    match branch {
        FractionalBranch::CriticalI if cfg.p < cfg.r => Err(Error::Hypothesis(format!(
            "critical case I requires p ≥ r, got p = {} and r = {}",
            cfg.p, cfg.r
        ))),
        FractionalBranch::CriticalII if cfg.p <= 1.0 => {
            Err(Error::Hypothesis("critical case II requires p > 1".into()))
        }
        _ => Ok(()),
    }
}

/// Fractional seminorm against `L^q_ω` deviation from the mean, with the
/// BBM factor `(1−s)^{1/r}`.
pub fn check_fractional_ps(
    suite: &TestSuite,
    cfg: &ExponentConfig,
    branch: FractionalBranch,
) -> Result<Vec<VerificationReport>> {
    check_fractional_ps_with(suite, cfg, branch, Quadrature::default())
}

pub fn check_fractional_ps_with(
    suite: &TestSuite,
    cfg: &ExponentConfig,
    branch: FractionalBranch,
    quad: Quadrature,
) -> Result<Vec<VerificationReport>> {
    suite.check(cfg)?;
    let eps = cfg.eps(Gap::S);
    check_fractional_hypotheses(cfg, branch, eps)?;
    let volume = suite.cube.volume();
    let bbm = pow(1.0 - cfg.s, 1.0 / cfg.r);
    let pairs = suite.weight_pairs(cfg)?;
    let mut out = Vec::new();
    for (fname, f) in suite.sample_functions()? {
        let inner = seminorm_inner(&f, cfg.r, cfg.s, quad)?;
        for wp in &pairs {
            let lhs = mean_deviation(&f, &wp.omega, cfg.q)?;
            let chr = apq_alpha(&wp.omega, &wp.sigma, cfg, suite.depth)?.value;
            let semi = seminorm_from_inner(&f, &inner, &wp.sigma, cfg.p, cfg.r)?;
            let mut parts = vec![
                ("characteristic", chr),
                ("bbm_factor", bbm),
                ("seminorm", semi),
            ];
            let mut diag = Vec::new();
            match branch {
                FractionalBranch::Subcritical => parts.push(("eps_factor", pow(volume, eps) / eps)),
                FractionalBranch::CriticalI => {
                    let (a, power) = omega_ainfty_power(&wp.omega, cfg, suite.depth)?;
                    parts.push(("ainfty_power", power));
                    diag.push(("ainfty_omega_q", a));
                }
                FractionalBranch::CriticalII => {
                    let a = ainfty_of(&wp.omega, cfg.q, suite.depth)?;
                    let b = ainfty_of(&wp.sigma, -cfg.p_prime(), suite.depth)?;
                    let (x, y) = (a.powf(inv_conjugate(cfg.p)), b.powf(1.0 / cfg.q));
                    parts.push(("ainfty_combined", if cfg.p < cfg.q { x + y } else { x * y }));
                    diag.push(("ainfty_omega_q", a));
                    diag.push(("ainfty_sigma_pprime", b));
                }
            }
            let id = format!("fractional_ps.{}:{fname}:{}", branch.tag(), wp.label);
            let mut report = VerificationReport::new(
                id,
                *cfg,
                suite.n,
                suite.depth,
                suite.seed,
                lhs,
                components(&parts),
            )
            .diagnostic("eps", eps);
            for (k, v) in diag {
                report = report.diagnostic(k, v);
            }
            out.push(finish(report, false));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingBranch {
    Subcritical,
    Critical,
}

/// `1/q + 1/p₁′`, the stated upper end of `α` for the embedding.
pub fn embedding_alpha_cap(cfg: &ExponentConfig) -> f64 {
    1.0 / cfg.q + inv_conjugate(cfg.p1())
}

fn check_embedding_hypotheses(
    cfg: &ExponentConfig,
    branch: EmbeddingBranch,
    eps: f64,
) -> Result<()> {
    let d = cfg.d as f64;
    let gap = 1.0 / cfg.p0 - 1.0 / cfg.r;
    if gap > 1.0 / d + CRITICAL_TOL {
        return Err(Error::Hypothesis(format!(
            "requires 1/p₀ − 1/r ≤ 1/d, got {gap}"
        )));
    }
    let critical = classify(eps)?;
    match branch {
        EmbeddingBranch::Subcritical if critical => Err(Error::Hypothesis(
            "the subcritical branch needs ε > 0".into(),
        )),
        EmbeddingBranch::Critical if !critical => Err(Error::Hypothesis(format!(
            "the critical branch needs ε = 0, got ε = {eps}"
        ))),
        EmbeddingBranch::Critical if !(1.0 < cfg.p0 && cfg.p0 < cfg.p) => {
            Err(Error::Hypothesis(format!(
                "the critical branch requires 1 < p₀ < p, got p₀ = {} and p = {}",
                cfg.p0, cfg.p
            )))
        }
        EmbeddingBranch::Critical if gap >= 1.0 / d => Err(Error::Hypothesis(format!(
            "the critical branch requires 1/p₀ − 1/r < 1/d, got {gap}"
        ))),
        _ => Ok(()),
    }
}

/// Whether the ratio of this run is reported without a pass/fail verdict.
fn sharp_factor_unknown(cfg: &ExponentConfig) -> bool {
    cfg.p == 1.0 && cfg.p < cfg.q && cfg.q < cfg.r && cfg.d >= 2
}

/// Gradient against the seminorm `[f]_{F^{s,ω}_{q,r}}`. The subcritical
/// branch also emits the `A_∞(σ^{−p₁′})` form when `p > p₀`.
pub fn check_embedding(
    suite: &TestSuite,
    cfg: &ExponentConfig,
    branch: EmbeddingBranch,
) -> Result<Vec<VerificationReport>> {
    check_embedding_with(suite, cfg, branch, Quadrature::default())
}

pub fn check_embedding_with(
    suite: &TestSuite,
    cfg: &ExponentConfig,
    branch: EmbeddingBranch,
    quad: Quadrature,
) -> Result<Vec<VerificationReport>> {
    suite.check(cfg)?;
    let cap = embedding_alpha_cap(cfg);
    if cfg.alpha >= cap {
        return Err(Error::Hypothesis(format!(
            "requires α < 1/q + 1/p₁′ = {cap}, got α = {}",
            cfg.alpha
        )));
    }
    embedding_runs(suite, cfg, branch, quad, false)
}

/// The first subcritical inequality for `1/q + 1/p₁′ ≤ α < 1/q + 1/p′`,
/// recorded without pass/fail.
pub fn check_embedding_relaxed(
    suite: &TestSuite,
    cfg: &ExponentConfig,
) -> Result<Vec<VerificationReport>> {
    suite.check(cfg)?;
    let cap = embedding_alpha_cap(cfg);
    if cfg.alpha < cap {
        return Err(param(format!(
            "relaxed runs need α ≥ 1/q + 1/p₁′ = {cap}, got α = {}; use check_embedding",
            cfg.alpha
        )));
    }
    embedding_runs(
        suite,
        cfg,
        EmbeddingBranch::Subcritical,
        Quadrature::default(),
        true,
    )
}

fn embedding_runs(
    suite: &TestSuite,
    cfg: &ExponentConfig,
    branch: EmbeddingBranch,
    quad: Quadrature,
    relaxed: bool,
) -> Result<Vec<VerificationReport>> {
    let eps = cfg.eps(Gap::OneMinusS);
    check_embedding_hypotheses(cfg, branch, eps)?;
    let d = cfg.d as f64;
    let p1 = cfg.p1();
    let volume = suite.cube.volume();
    let pairs = suite.weight_pairs(cfg)?;
    let pass_free = relaxed || sharp_factor_unknown(cfg);
    let mut out = Vec::new();
    for (fname, f) in suite.sample_functions()? {
        let inner = seminorm_inner(&f, cfg.r, cfg.s, quad)?;
        for wp in &pairs {
            let lhs = seminorm_from_inner(&f, &inner, &wp.omega, cfg.q, cfg.r)?;
            let chr =
                apq_characteristic(&wp.omega, &wp.sigma, p1, cfg.q, cfg.alpha, suite.depth)?.value;
            let grad = gradient_norm(&f, &wp.sigma, cfg.p)?;
            let new = |id: String, parts: &[(&str, f64)]| {
                VerificationReport::new(
                    id,
                    *cfg,
                    suite.n,
                    suite.depth,
                    suite.seed,
                    lhs,
                    components(parts),
                )
                .diagnostic("eps", eps)
            };
            match branch {
                EmbeddingBranch::Subcritical => {
                    let tag = if relaxed { "relaxed" } else { "i" };
                    let main = new(
                        format!("embedding.{tag}:{fname}:{}", wp.label),
                        &[
                            ("characteristic", chr),
                            ("eps_factor", pow(volume, eps) / pow(eps, 1.0 / cfg.gamma())),
                            ("scale_factor", 1.0 / (eps + cfg.s / d)),
                            ("gradient_norm", grad),
                        ],
                    );
                    out.push(finish(main, pass_free));
                    if !relaxed && cfg.p > cfg.p0 {
                        let b = ainfty_of(&wp.sigma, -cfg.p1_prime(), suite.depth)?;
                        let alt = new(
                            format!("embedding.i_ainfty:{fname}:{}", wp.label),
                            &[
                                ("characteristic", chr),
                                ("eps_factor", pow(volume, eps) / pow(eps, 1.0 / cfg.r)),
                                ("ainfty_power", b.powf(1.0 / cfg.q)),
                                ("gradient_norm", grad),
                            ],
                        )
                        .diagnostic("ainfty_sigma_p1prime", b);
                        out.push(finish(alt, pass_free));
                    }
                }
                EmbeddingBranch::Critical => {
                    let a = ainfty_of(&wp.omega, cfg.q, suite.depth)?;
                    let b = ainfty_of(&wp.sigma, -cfg.p1_prime(), suite.depth)?;
                    let (x, y) = (a.powf(inv_conjugate(cfg.p)), b.powf(1.0 / cfg.q));
                    let s_factor =
                        1.0 / (cfg.s.powf(1.0 + 1.0 / cfg.r) * (1.0 - cfg.s).powf(1.0 / cfg.r));
                    let report = new(
                        format!("embedding.ii:{fname}:{}", wp.label),
                        &[
                            ("characteristic", chr),
                            ("smoothness_factor", s_factor),
                            ("ainfty_combined", if cfg.p < cfg.q { x + y } else { x * y }),
                            ("gradient_norm", grad),
                        ],
                    )
                    .diagnostic("ainfty_omega_q", a)
                    .diagnostic("ainfty_sigma_p1prime", b);
                    out.push(finish(report, pass_free));
                }
            }
        }
    }
    Ok(out)
}

/// `‖g‖^p_{L^p_σ(γR)}` for every dyadic `R` of generation `g`, in slot order;
/// `γ = 3` folds the tripled cube back into `Q` by reflection.
fn dilate_norms_p(
    g: &GridFunction,
    sigma: &GridFunction,
    p: f64,
    gamma: u32,
    gen: u32,
) -> Result<Vec<f64>> {
    let vals: Vec<f64> = g
        .samples()
        .iter()
        .zip(sigma.samples())
        .map(|(v, w)| pow((v * w).abs(), p))
        .collect();
    let vol = g.cell_volume();
    if gamma == 1 {
        let pyr = Pyramid::sums(&vals, g.n(), g.dim());
        return Ok(pyr.level(gen).iter().map(|s| s * vol).collect());
    }
    crate::lattice::DyadicIndex::generation_iter(gen, g.dim())
        .map(|idx| {
            let cells = g.box_cells(&g.dyadic_box(&idx).triple(), Extension::Reflect)?;
            Ok(sum(cells.iter().map(|&c| vals[c])) * vol)
        })
        .collect()
}

/// The `L^q_ω` norm of `Σ_R |R|^ε ω^q(R)^{−1/q} ‖g‖_{L^p_σ(γR)} 1_R` over
/// dyadic `R` of generation `≤ depth`, against `(|Q|^ε/ε)‖g‖_{L^p_σ}`.
pub fn check_dyadic_summing(
    suite: &TestSuite,
    cfg: &ExponentConfig,
    eps: f64,
    gamma: u32,
) -> Result<Vec<VerificationReport>> {
    suite.check(cfg)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Hypothesis(format!(
            "the dyadic sum needs ε > 0, got {eps}"
        )));
    }
    if gamma != 1 && gamma != 3 {
        return Err(param(format!("dilation γ must be 1 or 3, got {gamma}")));
    }
    let (p, q, depth) = (cfg.p, cfg.q, suite.depth);
    let dim = suite.cube.dim();
    let volume = suite.cube.volume();
    let pairs = suite.weight_pairs(cfg)?;
    let mut out = Vec::new();
    for (fname, g) in suite.sample_functions()? {
        for wp in &pairs {
            let omega_q: Vec<f64> = wp.omega.samples().iter().map(|&w| pow(w, q)).collect();
            let om = Pyramid::sums(&omega_q, g.n(), dim);
            let mut total = vec![0.0; g.len()];
            for gen in 0..=depth {
                let norms = dilate_norms_p(&g, &wp.sigma, p, gamma, gen)?;
                let cube_vol = volume / crate::lattice::DyadicIndex::count(gen, dim) as f64;
                let coef: Vec<f64> = norms
                    .iter()
                    .enumerate()
                    .map(|(slot, np)| {
                        let om_r = om.level(gen)[slot] * g.cell_volume();
                        pow(cube_vol, eps) * pow(om_r, -1.0 / q) * pow(*np, 1.0 / p)
                    })
                    .collect();
                let shift = g.max_generation() - gen;
                for (x, t) in total.iter_mut().enumerate() {
                    let c = g.cell_coords(x);
                    let slot = (c[0] >> shift)
                        + (1usize << gen) * if dim == 2 { c[1] >> shift } else { 0 };
                    *t += coef[slot];
                }
            }
            let sums = GridFunction::new(suite.cube, g.n(), total)?;
            let lhs = lp_norm(&sums, &wp.omega, q)?;
            let gnorm = lp_norm(&g, &wp.sigma, p)?;
            let id = format!("dyadic_summing.g{gamma}:{fname}:{}", wp.label);
            let report = VerificationReport::new(
                id,
                *cfg,
                suite.n,
                depth,
                suite.seed,
                lhs,
                components(&[("eps_factor", pow(volume, eps) / eps), ("g_norm", gnorm)]),
            )
            .diagnostic("eps", eps)
            .diagnostic(
                "geometric_normalized_ratio",
                crate::verify::inequality_ratio(
                    lhs,
                    pow(volume, eps) / (1.0 - pow(2.0, -(dim as f64) * eps)) * gnorm,
                ),
            );
            out.push(finish(report, false));
        }
    }
    Ok(out)
}
