use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sandwich_cli::{emit_reports, exit_code, EXIT_FAILED_CHECK, EXIT_PASS};
use sandwich_core::sparse::{sparsity_check, SparseFamily};
use sandwich_core::verify::{VerificationReport, CSV_COLUMNS};
use sandwich_core::weights::ExponentConfig;
use tempfile::TempDir;

fn sandwich(args: &[&str], workers: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sandwich"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("SANDWICH_WORKERS", w.to_string()),
        None => cmd.env_remove("SANDWICH_WORKERS"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_config(dir: &Path, name: &str, body: &str) -> Output {
    let path = write_config(dir, name, body);
    sandwich(&["run", path.to_str().unwrap()], None)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let at = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(at).unwrap().to_string())
        .collect()
}

#[test]
fn affine_seminorm_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "semi.cfg",
        "command=seminorm\nd=1\nn=1024\np=1\nr=1\ns=0.5\nf=affine\n",
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("semi.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let value: f64 = column(&csv, "lhs")[0].parse().unwrap();
    assert!((value - 8.0 / 3.0).abs() < 1e-4 * 8.0 / 3.0, "{value}");
    assert_eq!(column(&csv, "reference"), vec![""]);
    assert_eq!(column(&csv, "pass"), vec!["na"]);
    assert!(dir.path().join("semi.json").exists());
}

#[test]
fn constraint_violations_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "pq.cfg",
        "command=verify\ntheorem=poincare_sobolev\np=2\nq=1\n",
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("requires p ≤ q"), "{}", stderr(&out));
    assert!(!dir.path().join("pq.csv").exists());

    let out = run_config(
        dir.path(),
        "sharp.cfg",
        "command=sharpness\nq=1\nr=1\ns=0.9\nn=1024\n",
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ε ≥ 4/n"), "{}", stderr(&out));

    let out = run_config(dir.path(), "keys.cfg", "command=bbm\nwidth=3\nheight=4\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("unknown keys: height, width"),
        "{}",
        stderr(&out)
    );

    let out = sandwich(
        &["run", dir.path().join("missing.cfg").to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_check_exits_with_two() {
    let dir = TempDir::new().unwrap();
    // the references come from the smooth suite; a sharp transition at p = 1 exceeds them
    let body = "command=verify\ntheorem=poincare_sobolev\np=1\nq=1\nr=1\nsuite=standard\n";
    let out = run_config(dir.path(), "sharp.cfg", body);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sharp.csv")).unwrap();
    let verdicts: Vec<(String, String)> = column(&csv, "experiment")
        .into_iter()
        .zip(column(&csv, "pass"))
        .collect();
    assert!(verdicts
        .iter()
        .any(|(e, p)| e.contains("transition") && p == "false"));
    assert!(verdicts
        .iter()
        .filter(|(e, _)| !e.contains("transition"))
        .all(|(_, p)| p == "true"));

    let out = run_config(
        dir.path(),
        "smooth.cfg",
        &body.replace("suite=standard", "suite=smooth"),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let body = "command=truncation\nd=1\nn=128\ndepth=5\nf=affine\nweight=const\nc_weak=1e-9\n";
    let out = run_config(dir.path(), "weak.cfg", body);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("below the measured hypothesis constant"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn json_detail_reproduces_csv_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let body =
        "command=verify\ntheorem=fractional_ps\nd=1\nn=128\ndepth=6\nseed=7\nsuite=standard\n";
    let out = run_config(dir.path(), "frac.cfg", body);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json = dir.path().join("frac.json");
    let out = sandwich(&["csv", json.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, fs::read(dir.path().join("frac.csv")).unwrap());
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    for (name, body) in [
        ("shipped", "command=verify\ntheorem=shipped\n"),
        (
            "sparse",
            "command=sparse\nd=2\nn=32\ndepth=5\nsuite=standard\n",
        ),
        (
            "semi",
            "command=seminorm\nd=2\nn=16\ndepth=4\nweight=suite\n",
        ),
    ] {
        let mut outputs = Vec::new();
        for workers in [1, 8] {
            let cfg = write_config(dir.path(), &format!("{name}{workers}.cfg"), body);
            let out = sandwich(&["run", cfg.to_str().unwrap()], Some(workers));
            assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
            outputs.push((
                fs::read(dir.path().join(format!("{name}{workers}.csv"))).unwrap(),
                fs::read(dir.path().join(format!("{name}{workers}.json"))).unwrap(),
            ));
        }
        assert_eq!(outputs[0], outputs[1], "{name}");
    }
    let out = run_config(dir.path(), "bad.cfg", "command=seminorm\n");
    assert_eq!(out.status.code(), Some(0));
    let cfg = dir.path().join("bad.cfg");
    let out = sandwich(&["run", cfg.to_str().unwrap()], Some(0));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sparse_families_are_written_for_replay() {
    let dir = TempDir::new().unwrap();
    let body =
        "command=sparse\nd=1\nn=256\ndepth=6\nsuite=standard\nsparse=oscillation\nfamilies=fam\n";
    let out = run_config(dir.path(), "sp.cfg", body);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sp.csv")).unwrap();
    let names: Vec<String> = column(&csv, "experiment");
    assert_eq!(names.len(), 5);
    for name in names {
        let label = name.split(':').nth(1).unwrap();
        let text =
            fs::read_to_string(dir.path().join("fam").join(format!("{label}.json"))).unwrap();
        let family = SparseFamily::from_json(&text).unwrap();
        assert!(sparsity_check(&family).0);
    }
}

fn trivial(i: usize) -> VerificationReport {
    let mut parts = BTreeMap::new();
    parts.insert("c".to_string(), 2.0);
    VerificationReport::new(
        format!("trivial:{i}"),
        ExponentConfig::default(),
        8,
        3,
        1,
        i as f64,
        parts,
    )
}

#[test]
fn emitted_files_follow_the_schema() {
    let dir = TempDir::new().unwrap();
    let (csv, json) = (dir.path().join("a/b.csv"), dir.path().join("a/b.json"));
    emit_reports(&[trivial(1)], &csv, &json).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(text.lines().count(), 2);
    assert!(!text.contains('\r'));

    let many: Vec<_> = (0..50).map(trivial).collect();
    emit_reports(&many, &csv, &json).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 51);
    let ids = column(&text, "experiment");
    assert!(ids
        .iter()
        .enumerate()
        .all(|(i, id)| *id == format!("trivial:{i}")));

    assert!(emit_reports(&[], &csv, &json).is_err());
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    assert!(emit_reports(&many, &blocker.join("x.csv"), &json).is_err());
}

#[test]
fn exit_code_reflects_verdicts() {
    let na = trivial(1);
    let ok = trivial(1).with_reference(Some(1.0));
    let bad = trivial(5).with_reference(Some(1.0));
    assert_eq!(exit_code(&[na.clone(), ok.clone()]), EXIT_PASS);
    assert_eq!(exit_code(&[na, ok, bad]), EXIT_FAILED_CHECK);
}
