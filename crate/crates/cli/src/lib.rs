//! Configuration-driven front end: parses experiment files, runs them and
//! writes a CSV summary plus a JSON detail file.

pub mod commands;
pub mod config;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use sandwich_core::verify::{
    reports_from_json, reports_to_csv, reports_to_json, VerificationReport,
};

pub use commands::{build_suite, execute, Outcome};
pub use config::{ConfigError, ExperimentConfig};

/// Environment variable holding the worker count.
pub const WORKERS_VAR: &str = "SANDWICH_WORKERS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED_CHECK: i32 = 2;

/// `EXIT_FAILED_CHECK` if any report carries a failing verdict.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| r.pass == Some(false)) {
        EXIT_FAILED_CHECK
    } else {
        EXIT_PASS
    }
}

/// Sizes the global rayon pool from [`WORKERS_VAR`], if set.
pub fn configure_workers() -> Result<()> {
    let Ok(value) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{WORKERS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("worker pool already initialised")
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes the CSV summary and JSON detail file for `reports`.
pub fn emit_reports(reports: &[VerificationReport], csv: &Path, json: &Path) -> Result<()> {
    anyhow::ensure!(!reports.is_empty(), "the run produced no reports");
    write(csv, &reports_to_csv(reports))?;
    write(json, &reports_to_json(reports))
}

/// Parses, runs and emits the experiment in `path`.
pub fn run(path: &Path) -> Result<Vec<VerificationReport>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let config = ExperimentConfig::parse(&text, path)?;
    let outcome = execute(&config)?;
    emit_reports(&outcome.reports, &config.csv, &config.json)?;
    if let Some(dir) = &config.families {
        for (label, family) in &outcome.families {
            write(&dir.join(format!("{label}.json")), &family.to_json())?;
        }
    }
    Ok(outcome.reports)
}

/// The CSV summary of a JSON detail file.
pub fn csv_from_json(path: &Path) -> Result<String> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(reports_to_csv(&reports_from_json(&text)?))
}
