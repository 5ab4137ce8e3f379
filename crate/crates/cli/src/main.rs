//! `mcf-lab`: catalogue, orbits, measures, symmetry and duality batteries,
//! and partition figures for the registered continued fraction systems.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit code for malformed command lines.
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "mcf-lab", version, about = "Multidimensional continued fractions as fibred systems")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Monte Carlo seed.
    #[arg(long, global = true, env = "MCF_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo samples per estimate.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub samples: u64,
    /// z above which a symmetry test reports a violation.
    #[arg(long = "z-crit", global = true, default_value_t = 5.0)]
    pub z_crit: f64,
    /// RNG substreams (results depend on this value, not on thread count).
    #[arg(long, global = true, default_value_t = 4)]
    pub workers: usize,
    /// Print the JSON report instead of the table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the records as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<std::path::PathBuf>,
    /// Where `figure` writes its SVG (stdout when absent).
    #[arg(long = "svg-out", global = true, value_name = "PATH")]
    pub svg_out: Option<std::path::PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Registered systems and their properties.
    List,
    /// Digits of an orbit.
    Expand(commands::ExpandArgs),
    /// Cylinder measure estimate.
    Measure(commands::MeasureArgs),
    /// Compare μ(B(k₁…k_s)) with μ(B(k_s…k₁)).
    Symmetry(commands::SymmetryArgs),
    /// Check the known intertwiner of a system.
    DualCheck(commands::DualCheckArgs),
    /// Search symmetric integer matrices for intertwiners.
    DualSearch(commands::DualSearchArgs),
    /// Involution counts and the Poincaré coset criterion.
    Telephone(commands::TelephoneArgs),
    /// SVG of an n = 2 cylinder partition.
    Figure(commands::FigureArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match commands::run(&cli, echo) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
