use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use seqdyn_cli::runner::apply_seed_override;
use seqdyn_cli::{run_experiment, CliError, ExperimentConfig, Preset, RunOptions};

#[derive(Parser)]
#[command(name = "seqdyn", version, about = "Experiments on sequential hyperbolic dynamics on S¹ and T²")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Cap on worker threads. Outputs do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe a preset: what it tests, knobs, defaults and outputs.
    Describe { preset: String },
    /// List the presets.
    List,
}

fn run(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run { config, threads, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_seed_override(&mut cfg)?;
            let summary = run_experiment(&cfg, &RunOptions { out, threads })?;
            for c in &summary.checks {
                println!(
                    "{} {}: {:?} {} {:?}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    serde_json::to_value(c.relation)?.as_str().unwrap_or("?"),
                    c.tolerance
                );
            }
            if !summary.pass {
                eprintln!("failed checks: {}", summary.failed.join(", "));
            }
            println!("summary: {}", summary.output.join("summary.json").display());
            Ok(summary.exit_code())
        }
        Command::Describe { preset } => {
            println!("{}", Preset::from_name(&preset)?.describe());
            Ok(0)
        }
        Command::List => {
            for p in Preset::ALL {
                println!("{}", p.name());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
