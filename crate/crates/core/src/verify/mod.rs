//! End-to-end inequality checks over seeded suites, with calibrated
//! reference constants and CSV/JSON reporting.

mod experiments;
mod one_weight;
mod references;
mod report;
mod suite;
mod theorems;

pub use experiments::{
    bbm_sweep, sharpness_eps, sharpness_experiment, sharpness_guard, BbmRow, SharpnessRow,
};
pub use one_weight::{
    one_weight_embedding, one_weight_fractional, one_weight_poincare, one_weight_suite,
};
pub use references::{
    calibrate, reference, run_shipped, shipped_runs, shipped_suite, RunKind, REFERENCE_MARGIN,
    SHIPPED_SEED,
};
pub use report::{
    fmt_real, inequality_ratio, reports_from_json, reports_to_csv, reports_to_json,
    VerificationReport, CSV_COLUMNS,
};
pub use suite::{
    profile, FunctionSpec, OneWeight, OneWeightSpec, TestSuite, WeightPair, WeightSpec,
    CHARACTERISTIC_CAP,
};
pub use theorems::{
    check_dyadic_summing, check_embedding, check_embedding_relaxed, check_embedding_with,
    check_fractional_ps, check_fractional_ps_with, check_poincare_sobolev, embedding_alpha_cap,
    EmbeddingBranch, FractionalBranch, CRITICAL_TOL,
};

/// Chains two bounds whose middle quantities coincide: the ratio and the
/// reference multiply, and the verdict is the product comparison.
pub fn compose(first: &VerificationReport, second: &VerificationReport) -> VerificationReport {
    let mut out = first.clone();
    out.experiment = format!("{}+{}", first.experiment, second.experiment);
    out.ratio = first.ratio * second.ratio;
    out.rhs = inequality_ratio(first.lhs, out.ratio);
    out.rhs_components.clear();
    out.rhs_components.insert("composed".into(), out.rhs);
    out.diagnostics.clear();
    out.diagnostics.insert("first_ratio".into(), first.ratio);
    out.diagnostics.insert("second_ratio".into(), second.ratio);
    let reference = first.reference.zip(second.reference).map(|(a, b)| a * b);
    out.with_reference(reference)
}
