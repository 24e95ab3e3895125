mod artifacts;
mod config;
mod error;
mod experiments;

use artifacts::{sha256_hex, Artifacts, ConfigSource};
use clap::{Args, Parser, Subcommand};
use config::{Experiment, ExperimentConfig};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "scars", version, about = "Quantum scarring experiments on spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lyapunov exponents of TI/IS orbits over a log-spaced |J|/|mu| scan.
    Lyapunov(Common),
    /// Energies, sigma^x_1 expectations and entanglement of all sector eigenstates.
    Spectrum(Common),
    /// Phase-space projections of selected eigenstates, with orbit traces.
    Project(Common),
    /// Infinite- or finite-time averaged projection of a coherent initial state.
    TimeAverage(Common),
    /// Classical ensemble counterpart of the time-averaged projection.
    ClassicalFidelity(Common),
    /// Scar scores of all eigenstates against random states.
    ScarStats(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config file; every key has a default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed of every random draw (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all available).
    #[arg(long)]
    threads: Option<usize>,
    /// Config override `section.key=value`, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(&self) -> (Experiment, &Common) {
        match self {
            Command::Lyapunov(c) => (Experiment::LyapunovScan, c),
            Command::Spectrum(c) => (Experiment::Spectrum, c),
            Command::Project(c) => (Experiment::ProjectEigenstates, c),
            Command::TimeAverage(c) => (Experiment::TimeAverage, c),
            Command::ClassicalFidelity(c) => (Experiment::ClassicalFidelity, c),
            Command::ScarStats(c) => (Experiment::ScarStats, c),
        }
    }
}

fn run(experiment: Experiment, common: &Common) -> Result<(), CliError> {
    let (text, source) = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
            let hash = sha256_hex(text.as_bytes());
            (text, (Some(path.display().to_string()), Some(hash)))
        }
        None => (String::new(), (None, None)),
    };
    let config = ExperimentConfig::resolve(&text, &common.set, common.seed)?;
    config.check_experiment(experiment)?;

    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }

    let mut out = Artifacts::create(&common.out)?;
    match experiment {
        Experiment::LyapunovScan => experiments::lyapunov_scan(&config, &mut out)?,
        Experiment::Spectrum => experiments::spectrum(&config, &mut out)?,
        Experiment::ProjectEigenstates => experiments::project(&config, &mut out)?,
        Experiment::TimeAverage => experiments::time_average(&config, &mut out)?,
        Experiment::ClassicalFidelity => experiments::classical_fidelity(&config, &mut out)?,
        Experiment::ScarStats => experiments::scar_stats(&config, &mut out)?,
    }
    let dir = out.dir().to_path_buf();
    let inputs = ConfigSource {
        path: source.0,
        sha256: source.1,
        overrides: common.set.clone(),
    };
    let written = out.finish(experiment.name(), &config, inputs)?;
    for entry in &written {
        println!("{}", dir.join(&entry.path).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = cli.command.split();
    match run(experiment, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = e.report();
            eprintln!(
                "{}",
                serde_json::json!({ "error": serde_json::to_value(&report).expect("plain report") })
            );
            ExitCode::from(report.exit_code as u8)
        }
    }
}
