use std::fs;
use std::path::Path;
use std::process::Command;

use msalab_cli::config::ExperimentConfig;

fn msalab(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_msalab"))
        .args(args)
        .current_dir(dir)
        .env_remove("THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

const WEGNER: &str = r#"
trials = 40

[model]
dim = 1
n_particles = 1
coupling = 5.0

[experiment]
kind = "mc-wegner"
sides = [4, 8]
"#;

#[test]
fn zero_trials_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", &WEGNER.replace("trials = 40", "trials = 0"));
    let out = msalab(&["run", "--config", "c.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn unknown_key_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", &WEGNER.replace("coupling = 5.0", "coupling = 5.0\ncuopling = 1"));
    let out = msalab(&["run", "--config", "c.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 8") && err.contains("cuopling"), "{}", err);
}

#[test]
fn resonant_energy_is_a_solver_error() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "[model]\ndim = 1\nn_particles = 1\ncoupling = 0.0\n[experiment]\nside = 1\nenergy = 0.0\n";
    write(tmp.path(), "c.toml", body);
    let out = msalab(&["green", "--config", "c.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn outputs_carry_hash_and_version_and_use_lf() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", WEGNER);
    let out = msalab(&["run", "--config", "c.toml", "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = tmp.path().join("o");
    let csv = fs::read_to_string(o.join("mc-wegner.summary.csv")).unwrap();
    let jsonl = fs::read_to_string(o.join("mc-wegner.jsonl")).unwrap();
    let resolved = fs::read_to_string(o.join("resolved_config.toml")).unwrap();
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with("# msalab 0.1.0 config_sha256="));
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "event,L,N,d,g,m,trials,hits,p_hat,ci_lo,ci_hi,grid_meta,seed"
    );
    assert_eq!(csv.lines().count(), 4);
    let hash = first.rsplit('=').next().unwrap();
    let header: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(header["config_sha256"], hash);
    assert_eq!(header["version"], "0.1.0");
    assert_eq!(jsonl.lines().count(), 1 + 2 * 41);
    for text in [&csv, &jsonl, &resolved] {
        assert!(!text.contains('\r'));
    }
    // the echoed configuration reproduces the hash
    let body: String = resolved.lines().skip(1).map(|l| format!("{}\n", l)).collect();
    let parsed = ExperimentConfig::parse(&body).unwrap();
    assert_eq!(parsed.hash(), hash);
    assert_eq!(parsed.clone().resolve(None).unwrap(), parsed);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", WEGNER);
    msalab(&["run", "--config", "c.toml", "--out", "a", "--seed", "5"], tmp.path());
    let csv = fs::read_to_string(tmp.path().join("a/mc-wegner.summary.csv")).unwrap();
    assert!(csv.lines().skip(2).all(|l| l.ends_with(",5")));
}

#[test]
fn every_subcommand_runs_with_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in ["assemble", "spectrum", "green", "classify", "scales", "jns-check", "decay"] {
        let out = msalab(&[kind, "--out", kind], tmp.path());
        assert!(out.status.success(), "{}: {}", kind, String::from_utf8_lossy(&out.stderr));
        assert!(tmp.path().join(kind).join(format!("{}.jsonl", kind)).exists());
    }
    write(tmp.path(), "g.toml", "[experiment]\nrange = 12\nsamples = 200\n");
    let out = msalab(&["geometry-check", "--config", "g.toml"], tmp.path());
    assert!(out.status.success());
    for (kind, extra) in [("mc-s0", ""), ("mc-ds", "side = 3\n"), ("mc-count", "side = 8\nsub_side = 2\n")] {
        let body = format!("trials = 5\n[experiment]\n{}", extra);
        write(tmp.path(), "m.toml", &body);
        let out = msalab(&[kind, "--config", "m.toml", "--out", kind], tmp.path());
        assert!(out.status.success(), "{}: {}", kind, String::from_utf8_lossy(&out.stderr));
        assert!(tmp.path().join(kind).join(format!("{}.summary.csv", kind)).exists());
    }
}
