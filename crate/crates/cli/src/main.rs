//! `lwkit`: transforms, operator dumps and the identity battery from the command line.

mod commands;
mod config;
mod fixtures;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lw(#[from] lwkit::LwError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser, Debug)]
#[command(name = "lwkit", version, about = "Landau-Weyl operator calculus on discretized phase space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Cross-Wigner transform W(psi, phi) on the phase grid
    Wigner,
    /// Short-time Fourier transform of psi with window phi
    Stft,
    /// Wavepacket transform U_phi psi for the configured (gamma, mu)
    Wavepacket,
    /// Weyl matrix of the symbol on the configuration grid
    Quantize,
    /// Moyal product of the symbol with U_phi psi
    Star,
    /// Eigen-report of the symbol (`magnetic` gives the Landau levels)
    Spectrum,
    /// Schroedinger evolution of psi under the symbol up to `--time`
    Evolve,
    /// Run the identity battery; exit 1 if any case fails
    Verify,
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("LWKIT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("LWKIT_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    init_threads()?;
    let cfg = cli.overrides.resolve()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    match cli.command {
        Command::Wigner => commands::wigner(&cfg),
        Command::Stft => commands::stft(&cfg),
        Command::Wavepacket => commands::wavepacket(&cfg),
        Command::Quantize => commands::quantize(&cfg),
        Command::Star => commands::star(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Evolve => commands::evolve(&cfg),
        Command::Verify => commands::verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lwkit: {e}");
            ExitCode::from(2)
        }
    }
}
