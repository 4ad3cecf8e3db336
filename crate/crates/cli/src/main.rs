//! `ccgeom`: constant-curvature solves, figure reproduction and the invariant suite.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Format, Inject, RunConfig};
use output::{Output, Status};

#[derive(Parser)]
#[command(name = "ccgeom", version, about = "Curves of constant geodesic curvature on charted surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory for artifacts and the run manifest.
    #[arg(long, env = "CCGEOM_OUT_DIR", default_value = "ccgeom-out")]
    out: PathBuf,
    /// Artifact formats to write (repeatable or comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json, Format::Svg])]
    format: Vec<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a disk whose boundary has constant geodesic curvature c.
    Solve {
        /// Surface configuration (TOML).
        #[arg(long)]
        surface: PathBuf,
        /// Prescribed geodesic curvature.
        #[arg(long)]
        c: f64,
        /// Vertex count of the seed curve.
        #[arg(long, default_value_t = 128)]
        grid: usize,
        /// Stopping threshold for the maximal curvature residual.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Seed of the initial-curve perturbation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Trace the comparison-criteria figures and check them against the reference points.
    RegionPlot {
        /// Samples per branch.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Regression tolerance replacing the per-figure defaults.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant and property checks of every module.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deliberate defect, for exercising the failure path.
        #[arg(long, value_enum)]
        inject: Option<Inject>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, out_dir) = match cli.command {
        Command::Solve { surface, c, grid, tol, seed, common } => {
            (RunConfig::Solve { surface, c, grid, tol, seed, formats: common.format }, common.out)
        }
        Command::RegionPlot { grid, tol, common } => (RunConfig::RegionPlot { grid, tol, formats: common.format }, common.out),
        Command::Verify { seed, inject, common } => (RunConfig::Verify { seed, inject, formats: common.format }, common.out),
    };
    let mut out = match Output::create(&out_dir) {
        Ok(out) => out,
        Err(f) => {
            eprintln!("{}", f.to_json());
            return f.status.into();
        }
    };
    let failure = cfg.execute(&mut out).err();
    if let Some(f) = &failure {
        eprintln!("{}", f.to_json());
    }
    if let Err(f) = out.finish(cfg.name(), cfg.inputs(), cfg.tolerances(), failure.as_ref()) {
        eprintln!("{}", f.to_json());
        return failure.map_or(f.status, |g| g.status).into();
    }
    failure.map_or(Status::Success, |f| f.status).into()
}
