//! `fbmin`: batch driver for critical disks and catenoids in the
//! spherical-cap metrics on the unit ball.
//!
//! Every command writes its outputs and a `<command>.manifest.json` into the
//! output directory. Exit codes: 0 success, 1 failed verification or I/O,
//! 2 usage, 3 numerical non-convergence, 4 inconclusive spectral report.

mod commands;
mod config;
mod manifest;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use config::Config;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;

/// A user error: bad flags, bad config, empty ranges.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Fast,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SurfaceArg {
    Disk,
    Catenoid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TopologyArg {
    Disk,
    Annulus,
    Other,
}

#[derive(Parser)]
#[command(name = "fbmin", version, about = "Critical disks and catenoids in spherical-cap metrics")]
struct Cli {
    /// JSON config file (tolerances, grids, sweep range, output directory).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides FBMIN_OUT_DIR and the config file.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// t0, r0 and the Riccati margin.
    Constants,
    /// Solve for the critical catenoid of g_t.
    Catenoid {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Output file (default: <out-dir>/catenoid.<format>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuation table over a uniform grid of t.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        t_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t_max: Option<f64>,
        /// Number of grid points, endpoints included.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Nullity and index of the disk or catenoid Jacobi operator.
    Spectrum {
        #[arg(long, value_enum)]
        surface: SurfaceArg,
    },
    /// Degree ledger for a topology.
    Degree {
        #[arg(long, value_enum)]
        topology: TopologyArg,
        /// Fail instead of computing spectral reports missing from the output
        /// directory.
        #[arg(long)]
        require_reports: bool,
    },
    /// Run the verification suites.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        suite: Suite,
        /// Mutation check: shift t0 inside the constants suite.
        #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb_t0: f64,
    },
}

fn run(cli: Cli) -> Result<u8> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    cfg.resolve_output_dir(cli.out_dir);
    match cli.command {
        Command::Constants => commands::constants(&cfg),
        Command::Catenoid { t, format, out } => commands::catenoid(&cfg, t, format, out),
        Command::Sweep { t_min, t_max, steps } => commands::sweep_cmd(&cfg, t_min, t_max, steps),
        Command::Spectrum { surface } => {
            let s = match surface {
                SurfaceArg::Disk => fbmin::SurfaceKind::Disk,
                SurfaceArg::Catenoid => fbmin::SurfaceKind::Catenoid,
            };
            commands::spectrum(&cfg, s)
        }
        Command::Degree { topology, require_reports } => {
            let t = match topology {
                TopologyArg::Disk => fbmin::Topology::Disk,
                TopologyArg::Annulus => fbmin::Topology::Annulus,
                TopologyArg::Other => fbmin::Topology::Other,
            };
            commands::degree(&cfg, t, require_reports)
        }
        Command::Verify { suite, perturb_t0 } => verify::verify(&cfg, suite, perturb_t0),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<fbmin::Error>() {
        Some(fbmin::Error::MissingReport(_) | fbmin::Error::UnknownManifold(_) | fbmin::Error::Resolution { .. }) => {
            EXIT_USAGE
        }
        Some(_) => EXIT_NUMERICAL,
        None => EXIT_FAILED,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
