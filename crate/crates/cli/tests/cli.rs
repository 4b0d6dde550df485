use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_seqdyn");

const RESIDUAL: &str = r#"
preset = "conjugacy-residual"
seed = 42

[maps.f]
family = "doubling"

[maps.g]
family = "doubling"
terms = [{ amplitude = 0.05, frequency = [1, 0] }]

[sequences.F]
form = "constant"
maps = ["f"]

[sequences.G]
form = "constant"
maps = ["g"]

[knobs]
resolution = 512
depth = 40
steps = 4
oracle_points = 64
"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p
}

fn seqdyn(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(BIN);
    c.args(args).env_remove("SEQDYN_SEED");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn residual_run_is_byte_identical_across_runs_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), RESIDUAL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = seqdyn(&["run", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--threads", "1"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = seqdyn(&["run", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--threads", "3"], &[]);
    assert!(out.status.success());
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    assert_eq!(fa.len(), 2);
    assert_eq!(fa, fb);
    let (sa, sb) = (summary(&a), summary(&b));
    assert_eq!(sa["config_hash"], sb["config_hash"]);
    assert_eq!(sa["checks"], sb["checks"]);
}

#[test]
fn summary_embeds_hash_version_and_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), RESIDUAL);
    let out = tmp.path().join("o");
    assert!(seqdyn(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[])
        .status
        .success());
    let s = summary(&out);
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);
    assert!(s["tool_version"].as_str().unwrap().starts_with("seqdyn "));
    assert_eq!(s["pass"], true);
    for c in s["checks"].as_array().unwrap() {
        for key in ["name", "measured", "relation", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "check lacks {key}");
        }
    }
    assert!(s["metadata"]["elapsed_seconds"].is_number());
}

#[test]
fn seed_env_overrides_config_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), RESIDUAL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    seqdyn(&["run", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()], &[]);
    seqdyn(&["run", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()], &[("SEQDYN_SEED", "7")]);
    let (sa, sb) = (summary(&a), summary(&b));
    assert_eq!(sa["seed"], 42);
    assert_eq!(sb["seed"], 7);
    assert_ne!(sa["config_hash"], sb["config_hash"]);

    let bad = seqdyn(&["run", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()], &[("SEQDYN_SEED", "x")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unknown_preset_exits_2_and_lists_presets() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &RESIDUAL.replace("conjugacy-residual", "bogus"));
    let out = seqdyn(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for p in ["shadowing-lipschitz", "entropy", "clt-asip"] {
        assert!(err.contains(p), "{err}");
    }
}

#[test]
fn unknown_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &RESIDUAL.replace("steps = 4", "steps = 4\nstepz = 5"));
    assert_eq!(seqdyn(&["run", cfg.to_str().unwrap()], &[]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_1_and_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{RESIDUAL}\n[tolerances]\nresidual = 0.0\n");
    let cfg = write_config(tmp.path(), &text);
    let out_dir = tmp.path().join("o");
    let out = seqdyn(&["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    let s = summary(&out_dir);
    assert_eq!(s["pass"], false);
    assert_eq!(s["failed"], serde_json::json!(["residual"]));
}

#[test]
fn describe_and_list() {
    let out = seqdyn(&["describe", "clt-asip"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("almost sure invariance principle") && text.contains("σ²"));

    let out = seqdyn(&["describe", "entropy"], &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("separated-set counting") && text.contains("ε schedule") && text.contains("n schedule"));

    assert_eq!(seqdyn(&["describe", "bogus"], &[]).status.code(), Some(2));

    let out = seqdyn(&["list"], &[]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 8);
}
