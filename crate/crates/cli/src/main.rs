//! lculab: run searches, combinations, fractional powers, preparation
//! jobs, and benchmark grids from the command line, emitting one
//! machine-readable record per experiment cell.
//!
//! Output is a pure function of the flags, the input file, and --seed;
//! wall time goes to stderr so the record stream stays reproducible.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod bench;
mod emit;
mod error;
mod fracpow;
mod grover;
mod input;
mod lcu;
mod prep;

use emit::{CostModelArg, Format};
use error::{error_record, CliError};

#[derive(Parser, Debug)]
#[command(name = "lculab", version, about = "Desk-scale quantum algorithm laboratory")]
struct Cli {
    /// Root seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record format for the output stream.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// How estimator work is charged to the ledger.
    #[arg(long = "cost-model", global = true, value_enum, default_value_t = CostModelArg::Sampling)]
    cost_model: CostModelArg,
    /// Measurement samples of the output state, where one is produced.
    #[arg(long, global = true, default_value_t = 0)]
    shots: u64,
    /// Write records to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for marked items, or fit how queries scale with size.
    Grover(grover::GroverArgs),
    /// Combine states as a weighted sum with one of the circuit routes.
    Lcu(lcu::LcuArgs),
    /// Apply a fractional power of a random plane rotation.
    Fracpow(fracpow::FracpowArgs),
    /// Prepare the normalized state of a classical vector.
    Prep(prep::PrepArgs),
    /// Run a method-comparison benchmark grid.
    Bench(bench::BenchArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Grover(_) => "grover",
            Command::Lcu(_) => "lcu",
            Command::Fracpow(_) => "fracpow",
            Command::Prep(_) => "prep",
            Command::Bench(_) => "bench",
        }
    }
}

/// Flags shared by every subcommand.
pub struct Globals {
    pub seed: u64,
    pub format: Format,
    pub cost_model: CostModelArg,
    pub shots: u64,
}

fn write_output(buf: &[u8], out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, buf)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            handle
                .write_all(buf)
                .and_then(|_| handle.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let globals = Globals {
        seed: cli.seed,
        format: cli.format,
        cost_model: cli.cost_model,
        shots: cli.shots,
    };

    let mut buf = Vec::new();
    let run = match &cli.command {
        Command::Grover(args) => grover::run(args, &globals, &mut buf),
        Command::Lcu(args) => lcu::run(args, &globals, &mut buf),
        Command::Fracpow(args) => fracpow::run(args, &globals, &mut buf),
        Command::Prep(args) => prep::run(args, &globals, &mut buf),
        Command::Bench(args) => bench::run(args, &globals, &mut buf),
    };

    let mut code = 0;
    if let Err(err) = &run {
        buf.clear();
        buf.extend_from_slice(error_record(err, cli.command.name(), cli.seed).as_bytes());
        buf.push(b'\n');
        code = err.exit_code();
    }
    if let Err(err) = write_output(&buf, &cli.out) {
        eprintln!("{}", err.message());
        if code == 0 {
            code = err.exit_code();
        }
    }
    eprintln!("wall_time_ms={}", started.elapsed().as_millis());
    std::process::exit(code);
}
