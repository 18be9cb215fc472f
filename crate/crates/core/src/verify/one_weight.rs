use std::collections::BTreeMap;

use super::report::{inequality_ratio, VerificationReport};
use super::suite::TestSuite;
use super::theorems::{ainfty_of, components, finish, mean, CRITICAL_TOL};
use crate::error::{Error, Result};
use crate::lattice::{pow, GridFunction};
use crate::norms::{lp_norm, seminorm_from_inner, seminorm_inner, Quadrature};
use crate::sum::sum;
use crate::weights::{au_characteristic, inv_conjugate, ExponentConfig};

/// `(1/w(Q) ∫_Q |g|^e w)^{1/e}`.
fn w_average(g: &GridFunction, w: &GridFunction, e: f64) -> f64 {
    let num = sum(g
        .samples()
        .iter()
        .zip(w.samples())
        .map(|(v, x)| pow(v.abs(), e) * x));
    let den = sum(w.samples().iter().copied());
    pow(num / den, 1.0 / e)
}

fn eps_sign(eps: f64) -> Result<()> {
    if eps < -CRITICAL_TOL {
        return Err(Error::Hypothesis(format!("requires ε ≥ 0, got ε = {eps}")));
    }
    Ok(())
}

fn check_u(cfg: &ExponentConfig) -> Result<()> {
    if cfg.u > cfg.p {
        return Err(Error::Hypothesis(format!(
            "requires 1 ≤ u ≤ p, got u = {} and p = {}",
            cfg.u, cfg.p
        )));
    }
    Ok(())
}

/// Builds one report from the common factors and the admissible branch
/// constants, keeping the smallest.
#[allow(clippy::too_many_arguments)]
fn assemble(
    corollary: &str,
    fname: &str,
    wname: &str,
    suite: &TestSuite,
    cfg: &ExponentConfig,
    lhs: f64,
    common: &[(&str, f64)],
    branches: &[(&str, f64)],
    eps: f64,
) -> Result<VerificationReport> {
    let (name, constant) = branches
        .iter()
        .copied()
        .fold(None::<(&str, f64)>, |best, (k, v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((k, v)),
        })
        .ok_or_else(|| Error::Hypothesis(format!("no branch of the {corollary} bound applies")))?;
    let mut parts: BTreeMap<String, f64> = components(common);
    parts.insert("branch_constant".into(), constant);
    let base: f64 = common.iter().map(|(_, v)| v).product();
    let mut report = VerificationReport::new(
        format!("one_weight.{corollary}:{fname}:{wname}:{name}"),
        *cfg,
        suite.n,
        suite.depth,
        suite.seed,
        lhs,
        parts,
    )
    .diagnostic("eps", eps);
    for (k, v) in branches {
        report = report.diagnostic(&format!("ratio.{k}"), inequality_ratio(lhs, base * v));
    }
    Ok(finish(report, false))
}

struct WeightData {
    ap: f64,
    au: f64,
    ainfty: f64,
}

fn weight_data(
    w: &GridFunction,
    cfg: &ExponentConfig,
    ap_index: f64,
    depth: u32,
) -> Result<WeightData> {
    Ok(WeightData {
        ap: au_characteristic(w, ap_index, depth)?.value,
        au: au_characteristic(w, cfg.u, depth)?.value,
        ainfty: ainfty_of(w, 1.0, depth)?,
    })
}

/// The one-weight gradient bound for `w ∈ A_u` with
/// `ε = 1/(du) − (1/p − 1/q)`.
pub fn one_weight_poincare(
    suite: &TestSuite,
    cfg: &ExponentConfig,
) -> Result<Vec<VerificationReport>> {
    suite.check(cfg)?;
    check_u(cfg)?;
    let (d, p, q) = (cfg.d as f64, cfg.p, cfg.q);
    let eps = 1.0 / (d * cfg.u) - (1.0 / p - 1.0 / q);
    eps_sign(eps)?;
    let mut out = Vec::new();
    for ow in suite.one_weight_family(cfg)? {
        let wd = weight_data(&ow.w, cfg, p, suite.depth)?;
        for (fname, f) in suite.sample_functions()? {
            let m = mean(&f);
            let lhs = w_average(&f.map(|v| v - m), &ow.w, q);
            let grad = w_average(&f.gradient_magnitude(), &ow.w, p);
            let common = [
                ("side", suite.cube.side()),
                ("gradient_average", grad),
                ("ap_power", pow(wd.ap, 1.0 / p)),
                ("au_power", pow(wd.au, 1.0 / p - 1.0 / q)),
            ];
            let mut branches = Vec::new();
            if eps > CRITICAL_TOL {
                branches.push(("inv_eps", 1.0 / eps));
            }
            if p > 1.0 {
                branches.push(("ainfty_pprime", wd.ainfty.powf(inv_conjugate(p))));
            } else {
                branches.push(("ainfty", wd.ainfty));
            }
            out.push(assemble(
                "poincare", &fname, &ow.label, suite, cfg, lhs, &common, &branches, eps,
            )?);
        }
    }
    Ok(out)
}

/// The one-weight fractional bound with `σ = w^{1/p}` and
/// `ε = s/(du) − (1/p − 1/q)`.
pub fn one_weight_fractional(
    suite: &TestSuite,
    cfg: &ExponentConfig,
) -> Result<Vec<VerificationReport>> {
    suite.check(cfg)?;
    check_u(cfg)?;
    let (d, p, q, r, s) = (cfg.d as f64, cfg.p, cfg.q, cfg.r, cfg.s);
    let eps = s / (d * cfg.u) - (1.0 / p - 1.0 / q);
    eps_sign(eps)?;
    let mut out = Vec::new();
    let functions = suite.sample_functions()?;
    let inners = functions
        .iter()
        .map(|(_, f)| seminorm_inner(f, r, s, Quadrature::default()))
        .collect::<Result<Vec<_>>>()?;
    for ow in suite.one_weight_family(cfg)? {
        let wd = weight_data(&ow.w, cfg, p, suite.depth)?;
        let dual = if p > 1.0 {
            Some(ainfty_of(&ow.w, -1.0 / (p - 1.0), suite.depth)?)
        } else {
            None
        };
        let w_mass = lp_norm(
            &ow.w,
            &GridFunction::constant(suite.cube, suite.n, 1.0)?,
            1.0,
        )?;
        let sigma = ow.w.map(|v| v.powf(1.0 / p));
        for ((fname, f), inner) in functions.iter().zip(&inners) {
            let m = mean(f);
            let lhs = w_average(&f.map(|v| v - m), &ow.w, q);
            let semi = seminorm_from_inner(f, inner, &sigma, p, r)? / pow(w_mass, 1.0 / p);
            let common = [
                ("side_power", pow(suite.cube.side(), s)),
                ("bbm_factor", pow(1.0 - s, 1.0 / r)),
                ("seminorm_average", semi),
                ("ap_power", pow(wd.ap, 1.0 / p)),
                ("au_power", pow(wd.au, 1.0 / p - 1.0 / q)),
            ];
            let mut branches = Vec::new();
            if eps > CRITICAL_TOL {
                branches.push(("inv_eps", 1.0 / eps));
            }
            if 1.0 < p && p < q && p >= r {
                branches.push(("ainfty_pprime", wd.ainfty.powf(inv_conjugate(p))));
            }
            if r == 1.0 && p == 1.0 {
                branches.push(("ainfty", wd.ainfty));
            }
            if let (true, Some(b)) = (1.0 < p && p < q, dual) {
                branches.push((
                    "ainfty_sum",
                    wd.ainfty.powf(inv_conjugate(p)) + b.powf(1.0 / q),
                ));
            }
            out.push(assemble(
                "fractional",
                fname,
                &ow.label,
                suite,
                cfg,
                lhs,
                &common,
                &branches,
                eps,
            )?);
        }
    }
    Ok(out)
}

/// The one-weight embedding for `w ∈ A_u ∩ A_{p/p₀}` with
/// `ε = (1−s)/(du) − (1/p − 1/q)`.
pub fn one_weight_embedding(
    suite: &TestSuite,
    cfg: &ExponentConfig,
) -> Result<Vec<VerificationReport>> {
    suite.check(cfg)?;
    let (d, p, q, r, s, p0) = (cfg.d as f64, cfg.p, cfg.q, cfg.r, cfg.s, cfg.p0);
    let gap = 1.0 / p0 - 1.0 / r;
    if gap > 1.0 / d + CRITICAL_TOL {
        return Err(Error::Hypothesis(format!(
            "requires 1/p₀ − 1/r ≤ 1/d, got {gap}"
        )));
    }
    let eps = (1.0 - s) / (d * cfg.u) - (1.0 / p - 1.0 / q);
    eps_sign(eps)?;
    let mut out = Vec::new();
    let functions = suite.sample_functions()?;
    let inners = functions
        .iter()
        .map(|(_, f)| seminorm_inner(f, r, s, Quadrature::default()))
        .collect::<Result<Vec<_>>>()?;
    for ow in suite.one_weight_family(cfg)? {
        if !ow.spec.in_class(cfg.d, p / p0) {
            continue;
        }
        let wd = weight_data(&ow.w, cfg, p / p0, suite.depth)?;
        let dual = if p > p0 {
            Some(ainfty_of(&ow.w, -1.0 / (p / p0 - 1.0), suite.depth)?)
        } else {
            None
        };
        let w_mass = lp_norm(
            &ow.w,
            &GridFunction::constant(suite.cube, suite.n, 1.0)?,
            1.0,
        )?;
        let omega = ow.w.map(|v| v.powf(1.0 / q));
        for ((fname, f), inner) in functions.iter().zip(&inners) {
            let lhs = seminorm_from_inner(f, inner, &omega, q, r)? / pow(w_mass, 1.0 / q);
            let grad = w_average(&f.gradient_magnitude(), &ow.w, p);
            let common = [
                ("side_power", pow(suite.cube.side(), 1.0 - s)),
                ("gradient_average", grad),
                ("ap_power", pow(wd.ap, 1.0 / p)),
                ("au_power", pow(wd.au, 1.0 / p - 1.0 / q)),
            ];
            let mut branches = Vec::new();
            if eps > CRITICAL_TOL {
                branches.push((
                    "eps_gamma",
                    pow(eps, -1.0 / q.min(r)) / (eps + s / (d * cfg.u)),
                ));
                if let Some(b) = dual {
                    branches.push(("eps_r_ainfty", pow(eps, -1.0 / r) * b.powf(1.0 / q)));
                }
            } else if let (true, Some(b)) = (p0 > 1.0 && gap < 1.0 / d, dual) {
                let factor = 1.0 / (s.powf(1.0 + 1.0 / r) * (1.0 - s).powf(1.0 / r));
                branches.push((
                    "critical",
                    factor * (wd.ainfty.powf(inv_conjugate(p)) + b.powf(1.0 / q)),
                ));
            }
            out.push(assemble(
                "embedding",
                fname,
                &ow.label,
                suite,
                cfg,
                lhs,
                &common,
                &branches,
                eps,
            )?);
        }
    }
    Ok(out)
}

/// Every one-weight bound whose hypotheses hold for `cfg`.
pub fn one_weight_suite(
    suite: &TestSuite,
    cfg: &ExponentConfig,
) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for run in [
        one_weight_poincare,
        one_weight_fractional,
        one_weight_embedding,
    ] {
        match run(suite, cfg) {
            Ok(mut r) => out.append(&mut r),
            Err(Error::Hypothesis(m)) => errors.push(m),
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() && !errors.is_empty() {
        return Err(Error::Hypothesis(errors.join("; ")));
    }
    Ok(out)
}
