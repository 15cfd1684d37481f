use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsc_cli::commands::{analyze_cmd, montecarlo_cmd, selectors_cmd, simulate_cmd};
use dsc_cli::wav::WavEncoding;
use dsc_cli::{CliError, RunConfig};

/// Double spectral clustering: separate cyclic fault impulses from impulsive
/// disturbances and noise.
#[derive(Parser)]
#[command(name = "dsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a signal and write it as WAV.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth JSON (onsets, amplitudes, parameters).
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = WavEncoding::Float32)]
        encoding: WavEncoding,
    },
    /// Run the clustering pipeline on a WAV file.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Directory for CSV plot data.
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Compare band selectors against the clustering result.
    Selectors {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Monte Carlo evaluation over noise level and impulse rate.
    Montecarlo {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Use the 100-iteration, 6 x 7 grid.
        #[arg(long)]
        full: bool,
        /// Worker threads.
        #[arg(long, env = "DSC_THREADS")]
        threads: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            sidecar,
            encoding,
        } => {
            let cfg = RunConfig::load(config.as_deref())?;
            simulate_cmd(&cfg, &out, sidecar.as_deref(), encoding)
        }
        Command::Analyze {
            input,
            config,
            report,
            plots,
        } => {
            let cfg = RunConfig::load(config.as_deref())?;
            analyze_cmd(&cfg, &input, report.as_deref(), plots.as_deref()).map(drop)
        }
        Command::Selectors {
            input,
            config,
            report,
        } => {
            let cfg = RunConfig::load(config.as_deref())?;
            selectors_cmd(&cfg, &input, report.as_deref()).map(drop)
        }
        Command::Montecarlo {
            config,
            out,
            full,
            threads,
        } => {
            let cfg = RunConfig::load(config.as_deref())?;
            montecarlo_cmd(&cfg, &out, full, threads).map(drop)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.kind().to_string());
            eprint!("{e}");
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
