use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use beampage::experiments::strip_timestamp;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beampage"))
}

fn smoke_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.toml")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn sweep_into(dir: &Path, jobs: &str) -> Output {
    let cfg = smoke_config();
    run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "11",
        "--jobs",
        jobs,
    ])
}

#[test]
fn every_subcommand_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = smoke_config();
    for (mode, file) in [
        ("analytic", "analytic.csv"),
        ("verify", "verify.csv"),
        ("simulate", "results.csv"),
        ("sweep", "comparison.csv"),
    ] {
        let out_dir = tmp.path().join(mode);
        let out = run(&[mode, "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{mode}: {}", stderr(&out));
        assert!(out_dir.join(file).is_file(), "{mode} wrote no {file}");
    }
    let results = tmp.path().join("sweep/results.csv");
    let cmp = tmp.path().join("cmp");
    let out = run(&["compare", results.to_str().unwrap(), "--out", cmp.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(cmp.join("comparison.csv")).unwrap();
    assert!(text.contains("total_rb_units_reduction_pct_vs_Legacy"));
    assert!(text.contains("par_count_reduction_pct_vs_MADP"));
}

#[test]
fn scheme_override_restricts_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = smoke_config();
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--scheme",
        "mfep-md:6/3/0",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = beampage::experiments::read_rows(&tmp.path().join("results.csv")).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.scheme == "MFEP-MD(6/3/0)" && r.n_m == "6/3/0"));
}

#[test]
fn config_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let out = run(&["simulate", "--scheme", "flooding", "--out", out_dir]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("scheme"), "{}", stderr(&out));

    let out = run(&["simulate", "--profile", "huge", "--out", out_dir]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("profile"));

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[simulation]\ntotal_beams = 48\n").unwrap();
    let out = run(&["simulate", "--config", bad.to_str().unwrap(), "--out", out_dir]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("total_beams"), "{}", stderr(&out));

    fs::write(&bad, "[simulation]\nbeams = 64\n").unwrap();
    let out = run(&["simulate", "--config", bad.to_str().unwrap(), "--out", out_dir]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("beams"), "{}", stderr(&out));

    let out = run(&["sweep", "--bogus"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn runtime_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.csv");
    let out = run(&["compare", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let missing = tmp.path().join("nope.toml");
    let out = run(&["simulate", "--config", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn help_exits_0() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["sweep", "--help"])), 0);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(code(&sweep_into(&a, "1")), 0);
    assert_eq!(code(&sweep_into(&b, "3")), 0);

    let mut files = Vec::new();
    let mut stack = vec![a.clone()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p);
            }
        }
    }
    assert!(files.len() > 3);
    for f in files {
        let rel = f.strip_prefix(&a).unwrap();
        let x = fs::read_to_string(&f).unwrap();
        let y = fs::read_to_string(b.join(rel)).unwrap();
        assert_eq!(strip_timestamp(&x), strip_timestamp(&y), "{}", rel.display());
    }
}
