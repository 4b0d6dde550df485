//! run_experiment: resolve the output directory, run the preset inside a
//! sized thread pool and write summary.json.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::artifacts::write_json;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::{run_preset, Check};

pub const SEED_ENV: &str = "SEQDYN_SEED";
pub const TOOL_VERSION: &str = concat!("seqdyn ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the config's output directory.
    pub out: Option<PathBuf>,
    /// Worker cap; None uses every core.
    pub threads: Option<usize>,
}

/// Timing and host data. The only part of any output that varies between
/// identical runs.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub timestamp_unix: u64,
    pub threads: usize,
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub preset: String,
    pub tool_version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub failed: Vec<String>,
    pub metrics: BTreeMap<String, Value>,
    pub pass: bool,
    pub output: PathBuf,
    pub metadata: Metadata,
}

impl Summary {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// SHA-256 of the canonical JSON form of the config. serde_json writes maps
/// in key order (every map in the config is a BTreeMap), so equal configs
/// hash equally regardless of TOML layout.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Apply SEQDYN_SEED if set.
pub fn apply_seed_override(cfg: &mut ExperimentConfig) -> Result<(), CliError> {
    if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.seed = v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
    }
    Ok(())
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Summary, CliError> {
    let preset = cfg.preset()?;
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("seqdyn-out").join(preset.name()));
    std::fs::create_dir_all(&out)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let started = Instant::now();
    log::info!("running {} (seed {}) into {}", preset.name(), cfg.seed, out.display());
    let outcome = pool.install(|| run_preset(cfg, &out))?;
    let summary = Summary {
        preset: preset.name().to_string(),
        tool_version: TOOL_VERSION,
        config_hash: config_hash(cfg)?,
        seed: cfg.seed,
        pass: outcome.pass(),
        failed: outcome.failed().into_iter().map(String::from).collect(),
        checks: outcome.checks,
        metrics: outcome.metrics,
        output: out.clone(),
        metadata: Metadata {
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            threads: pool.current_num_threads(),
            elapsed_seconds: started.elapsed().as_secs_f64(),
        },
    };
    write_json(&out, "summary.json", &summary)?;
    Ok(summary)
}
