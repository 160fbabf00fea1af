use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::Parser;
use freeact_cli::{execute, exit_status, Cli, CliError, Report};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("freeact").chain(args.iter().copied())).unwrap()
}

fn run(args: &[&str]) -> Report {
    execute(&cli(args)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn reports_are_deterministic() {
    let cfg = configs().join("pauli.toml").display().to_string();
    for cmd in ["build", "classify", "bundle", "equiv"] {
        let a = run(&[cmd, "--config", &cfg]);
        let b = run(&[cmd, "--config", &cfg]);
        assert_eq!(a.deterministic_json(), b.deterministic_json(), "{cmd}");
        assert_eq!(exit_status(&a), 0, "{cmd}: {:?}", a.invariant_violations);
    }
}

#[test]
fn cohomology_is_served_from_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache").display().to_string();
    let cfg = configs().join("klein_scalar.toml").display().to_string();
    let first = run(&["cohomology", "--config", &cfg, "--cache", &cache]);
    let second = run(&["cohomology", "--config", &cfg, "--cache", &cache]);
    let fresh = run(&["cohomology", "--config", &cfg, "--no-cache", "--cache", &cache]);
    assert_eq!(first.runtime.cache.as_deref(), Some("miss"));
    assert_eq!(second.runtime.cache.as_deref(), Some("hit"));
    assert_eq!(fresh.runtime.cache.as_deref(), Some("disabled"));
    assert_eq!(first.deterministic_json(), second.deterministic_json());
    assert_eq!(second.verdicts, fresh.verdicts);
    assert_eq!(second.certificates, fresh.certificates);
}

#[test]
fn stale_cache_entries_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c");
    let cfg = configs().join("klein_scalar.toml").display().to_string();
    let c = cache.display().to_string();
    run(&["cohomology", "--config", &cfg, "--cache", &c]);
    for entry in std::fs::read_dir(&cache).unwrap() {
        let p = entry.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap().replace("freeact-cohomology-v1", "freeact-cohomology-v0");
        std::fs::write(&p, text).unwrap();
    }
    let again = run(&["cohomology", "--config", &cfg, "--cache", &c]);
    assert_eq!(again.runtime.cache.as_deref(), Some("miss"));
}

#[test]
fn classify_klein_over_the_scalars() {
    let cfg = configs().join("klein_scalar.toml").display().to_string();
    let r = run(&["classify", "--config", &cfg]);
    assert_eq!(r.verdicts["class_count"], 2);
    let systems = r.verdicts["systems"].as_array().unwrap();
    let digests: Vec<&str> = systems.iter().map(|s| s["structure_digest"].as_str().unwrap()).collect();
    assert_ne!(digests[0], digests[1]);
    assert_eq!(r.verdicts["pairwise_inequivalent"], true);
}

#[test]
fn malformed_omega_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.toml", "group = [2, 2]\n[factor_system.omega]\n\"(1,0),(0,1)\" = [1, 1]\n");
    match execute(&cli(&["check", "--config", &p])) {
        Err(CliError::Config { location, .. }) => assert_eq!(location, "factor_system.omega.\"(1,0),(0,1)\""),
        other => panic!("{other:?}"),
    }
    let out = Process::new(env!("CARGO_BIN_EXE_freeact")).args(["check", "--config", &p]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(1,0),(0,1)"));
}

#[test]
fn non_cocycles_are_verdicts_not_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "nc.toml", "group = [2, 2]\n[factor_system.omega]\n\"(1,0),(0,1)\" = [1]\n");
    let r = run(&["check", "--config", &p]);
    assert_eq!(r.verdicts["factor_system"], false);
    let out = Process::new(env!("CARGO_BIN_EXE_freeact")).args(["build", "--config", &p, "--json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdicts"]["factor_system"], false);
}

#[test]
fn report_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cfg = configs().join("nc_torus_q3.toml");
    let status = Process::new(env!("CARGO_BIN_EXE_freeact"))
        .args(["build", "--config"])
        .arg(&cfg)
        .arg("--report")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "build");
    assert_eq!(v["verdicts"]["system"]["simple"], true);
    assert!(v["runtime"]["elapsed_ms"].is_u64());
}

#[test]
fn invariant_violations_exit_with_two() {
    let mut r = Report::new("build", String::new());
    assert_eq!(exit_status(&r), 0);
    r.require(false, "freeness criteria disagree");
    assert_eq!(exit_status(&r), 2);
}

#[test]
fn cohomology_from_flags() {
    let r = run(&["cohomology", "--group", "0", "--blocks", "2,2", "--action", "2,1", "--degree", "3"]);
    assert_eq!(r.verdicts["trivial"], true);
    let r = run(&["cohomology", "--group", "2,2", "--blocks", "1,1", "--action", "2,1;1,2", "--degree", "3", "--truncation", "2"]);
    assert_eq!(r.verdicts["trivial"], false);
}

#[test]
fn ops_from_the_command_line() {
    let cfg = configs().join("pauli.toml").display().to_string();
    let r = run(&["ops", "quotient", "--config", &cfg, "--subgroup", "1,0"]);
    assert_eq!(r.verdicts["target"]["dim"], 2);
    let r = run(&["ops", "mix", "--config", &cfg]);
    assert_eq!(r.verdicts["target"]["dim"], 16);
    assert_eq!(r.verdicts["freeness_preserved"], true);
}
