mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use trng_core::Error;

/// Dipole-noise random bit generator: simulate, extract, analyze, test,
/// expand and use the bits.
#[derive(Debug, Parser)]
#[command(name = "trng", version)]
pub struct Cli {
    /// `key=value` config file, or a manifest from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one setting, e.g. `--set sim.n_dipoles=512`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Simulation seed (same as `--set sim.seed=N`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Format of the summary printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the dipole Monte Carlo model and write the current trace.
    Simulate,
    /// Pass a trace through the front end: port 1, port 2 and the bits.
    Extract {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Slope histogram with Gaussian fit, time-lag map and bit balance.
    Analyze {
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        bits: Option<PathBuf>,
    },
    /// Run the statistical test suite; exit status 1 if any test fails.
    Nist {
        #[arg(long)]
        bits: PathBuf,
    },
    /// Expand a seed stream with the NLFSR (the simulated front end
    /// supplies the seed when none is given).
    Expand {
        /// Seed bits; `.txt` files are read as 0/1 text.
        #[arg(long)]
        seed_bits: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
    },
    /// Render bits as a square PBM bitmap.
    Bitmap {
        #[arg(long)]
        bits: Option<PathBuf>,
        #[arg(long, default_value_t = 1024)]
        side: usize,
    },
    /// Draw a one-time password.
    Otp {
        #[arg(long)]
        bits: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        length: usize,
        /// `alnum`, `digits`, `hex`, `binary`, or a literal set of characters.
        #[arg(long, default_value = "alnum")]
        charset: String,
    },
    /// Encrypt a file; writes `<name>.enc` and the 64-byte `<name>.key`.
    Encrypt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bits: Option<PathBuf>,
    },
    /// Verify and decrypt an envelope; exit status 1 on authentication failure.
    Decrypt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        key: PathBuf,
        /// Plaintext destination; defaults to `<out>/<name>.dec`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Add Laplace noise to a PGM/PPM image.
    Perturb {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        bits: Option<PathBuf>,
    },
}

/// Domain failures exit with 1, usage and input problems with 2.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Authentication
        | Error::Domain(_)
        | Error::InsufficientData(_)
        | Error::PoolExhausted { .. }
        | Error::SeedExhausted { .. } => 1,
        Error::InvalidParam { .. }
        | Error::UnknownKey(_)
        | Error::Config { .. }
        | Error::Format(_)
        | Error::UnsupportedVersion(_)
        | Error::Io(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
