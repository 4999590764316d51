use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reslab::model::ModelSpec;
use reslab_cli::{run_in, sweep, CliError, Experiment, ExperimentConfig, Parameters};

#[derive(Parser)]
#[command(name = "reslab", version, about = "Resonance experiments on truncated Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (used by sweeps; accepted for symmetry).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a config once per value of a scalar parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite on the default Nelson instance.
    Selfcheck {
        #[arg(long, default_value = "out/selfcheck")]
        out: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    ExperimentConfig::from_toml(&text)
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, jobs: _, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let outcome = run_in(&cfg, &dir)?;
            for f in &outcome.record.outputs {
                println!("{}  {}", f.sha256, f.path.display());
            }
            if outcome.failed_checks > 0 {
                return Err(CliError::SelfcheckFailed(outcome.failed_checks));
            }
            Ok(0)
        }
        Command::Sweep { config, axis, values, jobs, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let outcome = sweep(&cfg, &axis, &values, jobs, &dir)?;
            for (v, r) in outcome.values.iter().zip(&outcome.runs) {
                match r {
                    Ok(_) => println!("{axis} = {v}: ok"),
                    Err(e) => eprintln!("{axis} = {v}: {e}"),
                }
            }
            println!("{}", dir.join("sweep.csv").display());
            Ok(if outcome.failures() > 0 { 3 } else { 0 })
        }
        Command::Selfcheck { out } => {
            let cfg = ExperimentConfig::new(Experiment::Selfcheck, ModelSpec::default_nelson(), Parameters::default());
            let outcome = run_in(&cfg, &out)?;
            let csv = std::fs::read_to_string(out.join("selfcheck.csv")).unwrap_or_default();
            print!("{csv}");
            if outcome.failed_checks > 0 {
                return Err(CliError::SelfcheckFailed(outcome.failed_checks));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("reslab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
