use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ringlaw_cli::config::config_hash;
use ringlaw_cli::ExperimentManifest;
use tempfile::TempDir;

fn ringlaw(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ringlaw"));
    cmd.args(args).env_remove("RINGLAW_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TWO_POINT: &str = r#"{"measure": {"atoms": [1, 2], "weights": [0.5, 0.5]}, "ensemble": {"r": 1.4}}"#;

const LOCAL_LAW: &str = r#"{
  "measure": {"atoms": [1, 2], "weights": [0.5, 0.5]},
  "ensemble": {"seed": 11, "w": [1.4, 0.0]},
  "grid": {"n_values": [8, 16, 32], "trials": 4, "eta_floor_exponent": 0.9}
}"#;

#[test]
fn radii_prints_six_digits() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", TWO_POINT);
    let o = ringlaw(&["radii", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "1.264911 1.581139");
}

#[test]
fn certificate_json_has_closed_form_values() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", TWO_POINT);
    let o = ringlaw(&["certificate", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["s_minus"].as_f64().unwrap() - 2.5f64.sqrt()).abs() < 1e-10);
    assert!((v["b_minus"].as_f64().unwrap() - 0.36 / 1.96).abs() < 1e-10);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let missing = write(tmp.path(), "m.json", r#"{"measure": {"atoms": [1, 2]}}"#);
    let o = ringlaw(&["radii", "--config", missing.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("measure.weights"), "{}", stderr(&o));

    let o = ringlaw(&["nonsense"], &[]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("usage:"));
    assert_eq!(ringlaw(&[], &[]).status.code(), Some(64));
    assert_eq!(ringlaw(&["radii", "--bogus-flag"], &[]).status.code(), Some(64));

    let o = ringlaw(&["report"], &[]);
    assert_eq!(o.status.code(), Some(2));

    let wide = write(
        tmp.path(),
        "w.json",
        r#"{"measure": {"atoms": [1, 2], "weights": [0.5, 0.5]}, "ensemble": {"r": 1.7}}"#,
    );
    let o = ringlaw(&["certificate", "--config", wide.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2), "r outside the ring is a domain error: {}", stderr(&o));
}

#[test]
fn validate_reports_named_problems() {
    let tmp = TempDir::new().unwrap();
    let ok = write(tmp.path(), "ok.json", TWO_POINT);
    let o = ringlaw(&["validate", "--config", ok.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());

    let sum = write(tmp.path(), "s.json", r#"{"measure": {"atoms": [1, 2], "weights": [0.5, 0.6]}}"#);
    let o = ringlaw(&["validate", "--config", sum.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("measure `measure`"), "{}", stderr(&o));

    let tau = write(
        tmp.path(),
        "t.json",
        r#"{"measure": {"atoms": [1, 2], "weights": [0.5, 0.5]}, "grid": {"tau": 0.2}}"#,
    );
    let o = ringlaw(&["validate", "--config", tau.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("grid.tau") && err.contains("r_minus = ") && err.contains("r_plus = "), "{err}");
}

#[test]
fn manifest_invariants_and_collisions() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", LOCAL_LAW);
    let out = tmp.path().join("run");
    let o = ringlaw(&["local-law", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = ExperimentManifest::read(&out).unwrap();
    assert_eq!(m.command, "local-law");
    assert_eq!(m.seed, 11);
    assert_eq!(m.config_hash, config_hash(&m.config));
    assert!(m.hash_matches());
    for f in &m.outputs {
        assert!(out.join(f).is_file(), "{f}");
    }
    let header = std::fs::read_to_string(out.join("local_law.csv")).unwrap();
    assert!(header.starts_with("N,trial,w_re,w_im,eta,dev\n"));

    let again = ringlaw(&["local-law", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(again.status.code(), Some(2));
    let forced = ringlaw(
        &["local-law", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--overwrite"],
        &[],
    );
    assert_eq!(forced.status.code(), Some(0));
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", LOCAL_LAW);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    let run = |out: &Path, config: &Path, envs: &[(&str, &str)]| {
        let o = ringlaw(&["local-law", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()], envs);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    };
    run(&a, &cfg, &[("RINGLAW_THREADS", "1")]);
    run(&b, &a.join("manifest.json"), &[("RINGLAW_THREADS", "3")]);
    run(&c, &cfg, &[]);
    let bytes = |d: &Path| std::fs::read(d.join("local_law.csv")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
    assert_eq!(bytes(&a), bytes(&c));
    let (ma, mb) = (ExperimentManifest::read(&a).unwrap(), ExperimentManifest::read(&b).unwrap());
    assert_eq!(ma.config_hash, mb.config_hash);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", LOCAL_LAW);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (out, seed) in [(&a, "11"), (&b, "12")] {
        let o = ringlaw(
            &["local-law", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed],
            &[],
        );
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(ExperimentManifest::read(&b).unwrap().seed, 12);
    let csv = |d: &Path| std::fs::read(d.join("local_law.csv")).unwrap();
    assert_ne!(csv(&a), csv(&b));
    let c = tmp.path().join("c");
    ringlaw(&["local-law", "--config", cfg.to_str().unwrap(), "--out", c.to_str().unwrap()], &[]);
    assert_eq!(csv(&a), csv(&c));
}

#[test]
fn report_merges_sizes() {
    let tmp = TempDir::new().unwrap();
    let mut dirs = Vec::new();
    for n in [8, 16, 32] {
        let cfg = write(
            tmp.path(),
            &format!("c{n}.json"),
            &LOCAL_LAW.replace("[8, 16, 32]", &format!("[{n}]")),
        );
        let out = tmp.path().join(format!("n{n}"));
        let o = ringlaw(&["local-law", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("slope omitted"));
        dirs.push(out.to_str().unwrap().to_string());
    }
    let rep = tmp.path().join("rep");
    let mut args = vec!["report", "--out", rep.to_str().unwrap()];
    args.extend(dirs.iter().map(String::as_str));
    let o = ringlaw(&args, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fit = std::fs::read_to_string(rep.join("fit.csv")).unwrap();
    assert_eq!(fit.lines().count(), 2, "one slope row: {fit}");
    let summary = std::fs::read_to_string(rep.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(ExperimentManifest::read(&rep).unwrap().hash_matches());

    let single = ringlaw(&["report", &dirs[0]], &[]);
    assert_eq!(single.status.code(), Some(0));
    assert!(stdout(&single).contains("slope omitted"));
}

#[test]
fn report_rejects_mixed_schemas() {
    let tmp = TempDir::new().unwrap();
    let ll = write(tmp.path(), "ll.json", &LOCAL_LAW.replace("[8, 16, 32]", "[8]"));
    let bl = write(
        tmp.path(),
        "bl.json",
        r#"{"measure": {"atoms": [-1, 1], "weights": [0.5, 0.5]},
            "ensemble": {"xi": {"atoms": [-1, 1], "weights": [0.5, 0.5]}},
            "grid": {"energies": [0], "n_values": [8], "trials": 2, "eta_values": [1, 0.5], "target": "arcsine"}}"#,
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(ringlaw(&["local-law", "--config", ll.to_str().unwrap(), "--out", a.to_str().unwrap()], &[]).status.code(), Some(0));
    let o = ringlaw(&["block-law", "--config", bl.to_str().unwrap(), "--out", b.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = ringlaw(&["report", a.to_str().unwrap(), b.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("incompatible"), "{}", stderr(&o));
}

#[test]
fn every_experiment_writes_its_schema() {
    let tmp = TempDir::new().unwrap();
    let cases: [(&str, &str, &str, &str); 6] = [
        (
            "freeconv",
            r#"{"measure": {"atoms": [-1, 1], "weights": [0.5, 0.5]}, "ensemble": {"r": 1.0},
                "grid": {"energies": [0], "eta_values": [1]}}"#,
            "freeconv.csv",
            "E,eta,m_re,m_im,omega1_re,omega1_im,omega2_re,omega2_im,residual,iterations",
        ),
        (
            "ring-density",
            r#"{"measure": {"atoms": [1, 2], "weights": [0.5, 0.5]}, "grid": {"s_values": [1.4]}}"#,
            "ring_density.csv",
            "s,L,dL,d2L,rho",
        ),
        (
            "main-gap",
            r#"{"measure": {"atoms": [1, 2], "weights": [0.5, 0.5]}, "ensemble": {"n": 16, "w": [1.4, 0]},
                "grid": {"alpha_values": [0.25], "trials": 2, "cells": 16}}"#,
            "gap.csv",
            "N,trial,alpha,w0_re,w0_im,lhs,rhs,gap_norm",
        ),
        (
            "ssv-tail",
            r#"{"measure": {"atoms": [1, 2], "weights": [0.5, 0.5]}, "ensemble": {"n": 8, "w": [1.4, 0]},
                "grid": {"t_values": [0.01, 0.1, 1], "trials": 10}}"#,
            "ssv.csv",
            "N,trial,w_abs,t,lambda1",
        ),
        (
            "block-law",
            r#"{"measure": {"atoms": [-1, 1], "weights": [0.5, 0.5]},
                "ensemble": {"xi": {"atoms": [-1, 1], "weights": [0.5, 0.5]}},
                "grid": {"energies": [0], "n_values": [8], "trials": 2, "eta_values": [1], "target": "arcsine"}}"#,
            "block.csv",
            "N,trial,E,eta,dev",
        ),
        (
            "green-sub",
            r#"{"measure": {"atoms": [-1, 1], "weights": [0.5, 0.5]},
                "ensemble": {"n": 8, "xi": {"atoms": [-1, 1], "weights": [0.5, 0.5]}},
                "grid": {"z_values": [[0, 0.5]], "window": [-1, 1], "trials": 2}}"#,
            "subordination.csv",
            "N,trial,z_re,z_im,lambda_d_scaled,omegaB_gap,omegaA_gap,eigvec_sup",
        ),
    ];
    for (cmd, cfg, file, header) in cases {
        let path = write(tmp.path(), &format!("{cmd}.json"), cfg);
        let out = tmp.path().join(cmd);
        let o = ringlaw(&[cmd, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        let text = std::fs::read_to_string(out.join(file)).unwrap();
        assert_eq!(text.lines().next(), Some(header), "{cmd}");
        let m = ExperimentManifest::read(&out).unwrap();
        assert!(m.outputs.iter().all(|f| out.join(f).is_file()));
    }
}
