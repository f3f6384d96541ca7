use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kakeya_cli::{replay, run, ExperimentConfig, Format};

/// Runs a tube-union, book, box-dimension or lift experiment from a YAML
/// config. Exit status: 0 pass, 2 fail, 1 error.
#[derive(Parser)]
#[command(name = "kakeya", version)]
struct Cli {
    /// Experiment config (YAML).
    #[arg(long, conflicts_with = "replay")]
    config: Option<PathBuf>,

    /// Rerun the config embedded in an earlier report.
    #[arg(long)]
    replay: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<u64>,

    #[arg(long)]
    threads: Option<usize>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn load(cli: &Cli) -> kakeya_cli::Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, &cli.replay) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::from_yaml(&text).map_err(|e| match e {
                kakeya_cli::CliError::Config { line, message } => kakeya_cli::CliError::Config {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?
        }
        (None, Some(report)) => replay(report)?,
        (None, None) => {
            return Err(kakeya_cli::CliError::Config { line: 0, message: "either --config or --replay is required".into() })
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(s) = cli.samples {
        cfg.samples = Some(s);
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| run(&cfg, &cli.out, cli.format));
    match result {
        Ok(out) => {
            println!(
                "{}: {} ({})",
                out.report.display(),
                if out.outcome.verdict { "pass" } else { "fail" },
                out.data.display()
            );
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
