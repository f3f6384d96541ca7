//! Batch experiment runner: YAML config in, report and data table out.

pub mod commands;
pub mod config;
pub mod error;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use commands::{Outcome, Row};
pub use config::{ExperimentConfig, Run};
pub use error::{CliError, Result};

const CONFIG_BEGIN: &str = "# --- config ---";
const CONFIG_END: &str = "# --- end config ---";
const REPORT_NAME: &str = "report.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub outcome: Outcome,
    pub report: PathBuf,
    pub data: PathBuf,
}

impl RunOutput {
    /// 0 on pass, 2 on fail.
    pub fn exit_code(&self) -> i32 {
        if self.outcome.verdict {
            0
        } else {
            2
        }
    }
}

/// Executes `cfg` (inside a pool of `cfg.threads` when set) and writes
/// `report.txt` and `<command>.csv|json` into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path, format: Format) -> Result<RunOutput> {
    cfg.validate().map_err(|(key, message)| CliError::Config { line: 0, message: format!("{key}: {message}") })?;
    let outcome = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(|| commands::execute(cfg))?,
        None => commands::execute(cfg)?,
    };
    fs::create_dir_all(out)?;
    let report = out.join(REPORT_NAME);
    fs::write(&report, render_report(cfg, &outcome)?)?;
    let data = out.join(format!("{}.{}", cfg.run.name(), match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }));
    match format {
        Format::Csv => write_csv(&data, &outcome.rows)?,
        Format::Json => fs::write(&data, serde_json::to_string_pretty(&outcome.rows)? + "\n")?,
    }
    Ok(RunOutput { outcome, report, data })
}

fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["grid", "measured", "bound", "stderr"])?;
    for r in rows {
        w.write_record([r.grid, r.measured, r.bound, r.stderr].map(commands::fmt))?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_report(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<String> {
    let mut s = String::new();
    writeln!(s, "# kakeya experiment report").unwrap();
    writeln!(s, "{CONFIG_BEGIN}").unwrap();
    s.push_str(&cfg.to_yaml()?);
    writeln!(s, "{CONFIG_END}").unwrap();
    writeln!(s, "command: {}", cfg.run.name()).unwrap();
    writeln!(s, "verdict: {}", if outcome.verdict { "pass" } else { "fail" }).unwrap();
    for (k, v) in &outcome.summary {
        writeln!(s, "{k}: {v}").unwrap();
    }
    writeln!(s, "rows: {}", outcome.rows.len()).unwrap();
    Ok(s)
}

/// Reads back the config embedded in a report.
pub fn replay(report: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(report)?;
    let begin = text
        .find(CONFIG_BEGIN)
        .ok_or_else(|| CliError::Format("missing config header".into()))?;
    let body = &text[begin + CONFIG_BEGIN.len()..];
    let end = body.find(CONFIG_END).ok_or_else(|| CliError::Format("config block is not terminated".into()))?;
    ExperimentConfig::from_yaml(body[..end].trim_start_matches('\n'))
        .map_err(|e| CliError::Format(format!("embedded config: {e}")))
}
