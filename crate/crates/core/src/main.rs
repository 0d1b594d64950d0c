use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kickchain::cli::{self, ConfigError, ExperimentConfig, RunMode, Table};

#[derive(Parser)]
#[command(name = "kickchain", version, about = "State transfer through kicked multiferroic spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity per kick at one parameter point.
    Evolve(Common),
    /// Maximum fidelity along a parameter axis.
    Sweep(Common),
    /// Fourier spectrum of the fidelity per kick.
    Periodogram(Common),
    /// Check a config; optionally write the closed-form conformance report.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Write the two-qubit conformance table instead of a summary.
        #[arg(long)]
        conformance: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output file; standard output when absent from both flag and config.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Sweep worker threads.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Seed for every Monte Carlo estimate.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

impl Common {
    fn load(&self, mode: Option<RunMode>) -> Result<ExperimentConfig, ConfigError> {
        let mut config = cli::load_config(&self.config)?;
        if let Some(mode) = mode {
            config.run.mode = mode;
        }
        if let Some(w) = self.workers {
            config.run.workers = w;
        }
        if let Some(s) = self.seed {
            config.run.seed = s;
        }
        if let Some(out) = &self.out {
            config.output.path = Some(out.display().to_string());
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(table: &Table, config: &ExperimentConfig) -> Result<(), ConfigError> {
    let bytes = table.to_bytes(config.output.format);
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| ConfigError::Io { path, source }
    };
    match &config.output.path {
        Some(p) => {
            let path = Path::new(p);
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            std::fs::write(path, bytes).map_err(io_err(path))
        }
        None => std::io::stdout().write_all(&bytes).map_err(io_err(Path::new("<stdout>"))),
    }
}

fn execute(command: &Command) -> Result<(), ConfigError> {
    match command {
        Command::Evolve(c) => run_mode(c, RunMode::Evolve),
        Command::Sweep(c) => run_mode(c, RunMode::Sweep),
        Command::Periodogram(c) => run_mode(c, RunMode::Periodogram),
        Command::Validate { common, conformance } => {
            let config = common.load(None)?;
            if *conformance {
                emit(&cli::run_conformance(&config)?, &config)
            } else {
                let summary = serde_json::json!({
                    "valid": true,
                    "mode": config.run.mode,
                    "n_sites": config.chain.n_sites,
                    "states": config.run.states,
                });
                println!("{summary}");
                Ok(())
            }
        }
    }
}

fn run_mode(common: &Common, mode: RunMode) -> Result<(), ConfigError> {
    let config = common.load(Some(mode))?;
    emit(&cli::run(&config, mode)?, &config)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match execute(&args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
