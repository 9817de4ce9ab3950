//! Experiment harness for capability-aware ad hoc teamwork: JSON configs,
//! seeded parallel match execution, per-match CSV records and aggregate
//! score and deviation tables.

pub mod config;
pub mod harness;
pub mod metrics;
pub mod presets;
pub mod report;

use std::fs;
use std::path::Path;

pub use config::{ConfigError, ExperimentConfig};
pub use harness::{run_experiment, HarnessError, MatchRow};
pub use report::{summarize, Summary};

/// Runs an experiment and writes `matches.csv`, `summary.json` and the
/// resolved `config.json` into `out`.
pub fn run_to_dir(cfg: &ExperimentConfig, workers: usize, out: &Path) -> Result<Summary, HarnessError> {
    let rows = run_experiment(cfg, workers)?;
    fs::create_dir_all(out)?;
    harness::write_csv(&rows, fs::File::create(out.join("matches.csv"))?)?;
    let summary = summarize(&rows);
    fs::write(out.join("summary.json"), summary_json(&summary))?;
    fs::write(out.join("config.json"), cfg.to_json())?;
    Ok(summary)
}

pub fn summary_json(summary: &Summary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes") + "\n"
}

/// Re-aggregates a per-match CSV.
pub fn report_csv(path: &Path) -> Result<Summary, HarnessError> {
    let rows = harness::read_csv(fs::File::open(path)?)?;
    Ok(summarize(&rows))
}
