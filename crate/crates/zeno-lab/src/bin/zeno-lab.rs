//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zeno_lab::cli::{run_command, CliOptions, Command};
use zeno_lab::config::{ExperimentConfig, FigureId, OutputFormat};
use zeno_lab::error::Error;

#[derive(Parser)]
#[command(
    name = "zeno-lab",
    version,
    about = "Qubit-in-a-Lorentzian-bath simulator: survival probabilities under \
             repeated projective measurements, decay-rate sweeps, and analytic baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment config (TOML). Required for every subcommand except `figure`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Data file format: csv or json (overrides the config's `format`).
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured measurement protocol and emit the survival series.
    Simulate,
    /// Sweep the total average decay rate over the τ grid and locate
    /// suppression/enhancement transitions.
    SweepTau,
    /// Reproduce a named figure preset (fig1..fig6); ignores --config.
    Figure { name: String },
    /// Master equation vs the rotating-wave closed forms.
    CompareRw,
    /// Master equation vs the perturbative rate equation under non-selective
    /// monitoring.
    CompareRate,
    /// Step-halving and truncation-doubling report.
    CheckConvergence,
}

fn default_figure_config() -> ExperimentConfig {
    ExperimentConfig::parse(
        r#"
delta = 1.0
omega0 = 1.0
g = 0.5
gamma = 0.1
state = "e"
tau = 1.0
n = 16
"#,
    )
    .expect("built-in config is valid")
}

fn run() -> Result<Vec<PathBuf>, Error> {
    let cli = Cli::parse();

    let command = match &cli.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::SweepTau => Command::SweepTau,
        Cmd::Figure { name } => Command::Figure(name.parse::<FigureId>()?),
        Cmd::CompareRw => Command::CompareRw,
        Cmd::CompareRate => Command::CompareRate,
        Cmd::CheckConvergence => Command::CheckConvergence,
    };

    let config = match (&cli.config, &command) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        (None, Command::Figure(_)) => default_figure_config(),
        (None, _) => {
            return Err(Error::Config(
                "--config FILE is required for this subcommand".into(),
            ))
        }
    };

    let format = match cli.format.as_deref() {
        None => None,
        Some("csv") => Some(OutputFormat::Csv),
        Some("json") => Some(OutputFormat::Json),
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown format {other:?}; expected csv or json"
            )))
        }
    };

    let opts = CliOptions {
        out_dir: cli.out,
        jobs: cli.jobs,
        format,
    };
    run_command(command, &config, &opts)
}

fn main() -> ExitCode {
    match run() {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let payload = serde_json::json!({
                "error": { "kind": err.kind(), "message": err.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
