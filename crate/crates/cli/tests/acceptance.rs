//! The acceptance suite: criteria 1-10 run the shipped configs in configs/
//! and check their summaries and runtimes; criterion 11 reruns every config
//! at a different thread count and compares the CSV bytes.
//!
//! A plain binary (no libtest harness), so the one PASS/FAIL line per
//! criterion is always printed as it completes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use seqdyn_cli::{run_experiment, ExperimentConfig, RunOptions, Summary};

struct Criterion {
    id: u32,
    title: &'static str,
    config: &'static str,
    limit: Option<Duration>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        title: "shadowing bound, expanding",
        config: "01-shadowing-expanding.toml",
        limit: Some(Duration::from_secs(10)),
    },
    Criterion {
        id: 2,
        title: "Lipschitz shadowing, Anosov",
        config: "02-shadowing-anosov.toml",
        limit: Some(Duration::from_secs(60)),
    },
    Criterion {
        id: 3,
        title: "sequential conjugacy residual",
        config: "03-conjugacy-residual.toml",
        limit: Some(Duration::from_secs(30)),
    },
    Criterion {
        id: 4,
        title: "Lipschitz proximity of conjugacy",
        config: "04-conjugacy-proximity.toml",
        limit: None,
    },
    Criterion {
        id: 5,
        title: "quasi-conjugacy bound",
        config: "05-quasi-conjugacy.toml",
        limit: Some(Duration::from_secs(30)),
    },
    Criterion {
        id: 6,
        title: "ergodic stability",
        config: "06-birkhoff-stability.toml",
        limit: Some(Duration::from_secs(120)),
    },
    Criterion {
        id: 7,
        title: "periodic-sequence measure",
        config: "07-periodic-measure.toml",
        limit: Some(Duration::from_secs(120)),
    },
    Criterion {
        id: 8,
        title: "irregular point",
        config: "08-irregular-point.toml",
        limit: Some(Duration::from_secs(60)),
    },
    Criterion {
        id: 9,
        title: "entropy",
        config: "09-entropy.toml",
        limit: Some(Duration::from_secs(180)),
    },
    Criterion {
        id: 10,
        title: "CLT/ASIP harness",
        config: "10-clt-asip.toml",
        limit: Some(Duration::from_secs(180)),
    },
];

/// Checks each criterion requires; the summary must contain all of them.
fn required_checks(id: u32) -> &'static [&'static str] {
    match id {
        1 => &["certified", "beta-bound"],
        2 => &["certified", "slope"],
        3 => &["residual", "oracle"],
        4 => &["proximity-spread", "proximity-lipschitz", "tail-monotone", "tail-final"],
        5 => &["defect-G02", "defect-G01"],
        6 => &["within-fraction", "ks-median"],
        7 => &["ks"],
        8 => &["limsup", "liminf", "gap-persistence", "transport-budget"],
        9 => &["entropy-F", "entropy-C", "comparison"],
        10 => &[
            "sigma2",
            "clt-p-F",
            "clt-p-T",
            "rate-admissible-T",
            "collapse",
            "drift-exponent",
        ],
        _ => &[],
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(config: &str, out: &Path, threads: usize) -> Result<(Summary, Duration), String> {
    let cfg = ExperimentConfig::load(&configs_dir().join(config)).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let s = run_experiment(
        &cfg,
        &RunOptions {
            out: Some(out.to_path_buf()),
            threads: Some(threads),
        },
    )
    .map_err(|e| e.to_string())?;
    Ok((s, t.elapsed()))
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn verdict(s: &Summary, id: u32, elapsed: Duration, limit: Option<Duration>) -> Result<String, String> {
    let missing: Vec<&str> = required_checks(id)
        .iter()
        .copied()
        .filter(|name| !s.checks.iter().any(|c| c.name == *name))
        .collect();
    let detail: Vec<String> = s
        .checks
        .iter()
        .map(|c| format!("{}={:.4e}", c.name, c.measured))
        .collect();
    let timing = match limit {
        Some(l) => format!("{:.1} s / {} s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.1} s", elapsed.as_secs_f64()),
    };
    let line = format!("{timing}; {}", detail.join(" "));
    if !missing.is_empty() {
        return Err(format!("{line}; missing checks {missing:?}"));
    }
    if !s.pass {
        return Err(format!("{line}; failed {:?}", s.failed));
    }
    if limit.is_some_and(|l| elapsed > l) {
        return Err(format!("{line}; over the runtime limit"));
    }
    Ok(line)
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut report = |id: u32, title: &str, r: Result<String, String>| {
        let (tag, text) = match &r {
            Ok(t) => ("PASS", t.clone()),
            Err(t) => ("FAIL", t.clone()),
        };
        println!("criterion {id:>2} {tag} {title}: {text}");
        if r.is_err() {
            failures.push(id);
        }
    };

    for c in &CRITERIA {
        let out = root.path().join(format!("c{:02}-t1", c.id));
        let r = run(c.config, &out, 1).and_then(|(s, t)| verdict(&s, c.id, t, c.limit));
        report(c.id, c.title, r);
    }

    // criterion 11: rerun every config at 3 threads against the 1-thread run
    let mut diffs = Vec::new();
    for c in &CRITERIA {
        let first = root.path().join(format!("c{:02}-t1", c.id));
        let again = root.path().join(format!("c{:02}-t3", c.id));
        match run(c.config, &again, 3) {
            Ok(_) => {
                let (a, b) = (csv_bytes(&first), csv_bytes(&again));
                if a.is_empty() || a != b {
                    diffs.push(format!("{} ({} vs {} files)", c.config, a.len(), b.len()));
                }
            }
            Err(e) => diffs.push(format!("{}: {e}", c.config)),
        }
    }
    let r = if diffs.is_empty() {
        Ok(format!("{} presets byte-identical at 1 and 3 threads", CRITERIA.len()))
    } else {
        Err(format!("differences in {}", diffs.join(", ")))
    };
    report(11, "determinism", r);

    if !failures.is_empty() {
        eprintln!("failed criteria: {failures:?}");
        std::process::exit(1);
    }
}
