use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use captype::config::ConfigError;
use captype::{presets, report, ExperimentConfig, HarnessError};
use captype_core::oracle::{verify_theorem, Theorem, VerifyConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "captype", version, about = "Capability-aware ad hoc teamwork experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write matches.csv and summary.json.
    Run {
        /// JSON experiment config.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Built-in config by name (see `captype preset`).
        #[arg(long)]
        preset: Option<String>,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Parallel match workers (overrides the config).
        #[arg(long)]
        workers: Option<usize>,
        /// Seed base (overrides the config); match k uses base + k.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the inference guarantees on random tabular games.
    Verify {
        /// t1, t2, t3, t4, lemma or all.
        #[arg(long, default_value = "all")]
        theorem: String,
        /// Trials per check; defaults to 50, 50, 100, 500 and 1000.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the reports as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-aggregate a matches.csv.
    Report {
        csv: PathBuf,
        /// Print the summary as JSON instead of tables.
        #[arg(long)]
        json: bool,
    },
    /// Print a built-in config, or list them.
    Preset { name: Option<String> },
}

fn default_trials(t: Theorem) -> usize {
    match t {
        Theorem::T1 | Theorem::T2 => 50,
        Theorem::T3 => 100,
        Theorem::T4 => 500,
        Theorem::Lemma => 1000,
    }
}

enum Failure {
    Config(String),
    Verify,
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => Failure::Config(c.to_string()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            preset,
            out,
            workers,
            seed,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => ExperimentConfig::load(&path)?,
                (None, Some(name)) => {
                    presets::preset(&name).ok_or_else(|| ConfigError(format!("unknown preset `{name}`")))?
                }
                (None, None) => unreachable!("clap requires one of them"),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let workers = workers.unwrap_or(cfg.workers);
            if workers == 0 {
                return Err(Failure::Config("workers must be at least 1".into()));
            }
            let summary = captype::run_to_dir(&cfg, workers, &out)?;
            print!("{}", report::render(&summary));
            eprintln!("wrote {}", out.join("matches.csv").display());
            Ok(())
        }
        Command::Verify {
            theorem,
            trials,
            seed,
            out,
        } => {
            let which: Vec<Theorem> = if theorem == "all" {
                vec![Theorem::T1, Theorem::T2, Theorem::T3, Theorem::T4, Theorem::Lemma]
            } else {
                vec![Theorem::parse(&theorem).ok_or_else(|| Failure::Config(format!("unknown check `{theorem}`")))?]
            };
            let cfg = VerifyConfig::default();
            let mut reports = Vec::new();
            for t in which {
                let n = trials.unwrap_or_else(|| default_trials(t));
                let r = verify_theorem(t, n, seed, &cfg).map_err(|e| Failure::Config(e.to_string()))?;
                println!(
                    "{:<6} {} trials={} checks={} violations={} max={:.3e} bound={:.3e} pass={:.3}",
                    r.theorem,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.trials,
                    r.checks,
                    r.violations,
                    r.max_deviation,
                    r.bound,
                    r.pass_fraction
                );
                if !r.violation_seeds.is_empty() {
                    println!("       violating seeds: {:?}", r.violation_seeds);
                }
                reports.push(r);
            }
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&reports).context("serializing reports")?;
                std::fs::write(&path, text).with_context(|| path.display().to_string())?;
            }
            if reports.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
        Command::Report { csv, json } => {
            let summary = captype::report_csv(&csv)?;
            if json {
                print!("{}", captype::summary_json(&summary));
            } else {
                print!("{}", report::render(&summary));
            }
            Ok(())
        }
        Command::Preset { name: None } => {
            for n in presets::NAMES {
                println!("{n}");
            }
            Ok(())
        }
        Command::Preset { name: Some(name) } => {
            let cfg = presets::preset(&name).ok_or_else(|| Failure::Config(format!("unknown preset `{name}`")))?;
            println!("{}", cfg.to_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verify) => ExitCode::from(3),
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
