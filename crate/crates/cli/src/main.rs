//! `mollifem`: meshes, patch tests, convergence studies and basis dumps.
//!
//! Exit status is 0 on success, 1 when a check fails or a run breaks down,
//! and 2 for configuration errors. `MOLLIFEM_THREADS` sets the number of
//! worker threads.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "mollifem", version, about = "Mollified finite elements on Voronoi partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the (coarsest) mesh and write cells.csv, polygons.csv and mesh.vtk.
    Mesh(Source),
    /// Run the patch tests and fail if an L2 error exceeds its tolerance.
    Patch(Source),
    /// Run the refinement ladder and write errors_q*.csv and rates.csv.
    Converge(Source),
    /// Sample one cell's basis over its support into basis.csv.
    Basis(Source),
}

#[derive(Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: paper-1d, paper-square or paper-plate.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory, created if missing (default: `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("MOLLIFEM_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        ConfigError(format!("MOLLIFEM_THREADS must be a positive integer, got '{v}'"))
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| ConfigError(e.to_string()))
}

fn load(src: &Source) -> Result<(RunConfig, PathBuf), ConfigError> {
    let mut cfg = match (&src.config, &src.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => return Err(ConfigError("either --config or --preset is required".into())),
    };
    cfg.validate()?;
    if let Some(out) = &src.out {
        cfg.out = Some(out.clone());
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out))
}

type Handler = fn(&RunConfig, &std::path::Path) -> anyhow::Result<Outcome>;

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    threads()?;
    let (cmd, src): (Handler, &Source) = match &cli.command {
        Command::Mesh(s) => (commands::mesh, s),
        Command::Patch(s) => (commands::patch, s),
        Command::Converge(s) => (commands::converge, s),
        Command::Basis(s) => (commands::basis, s),
    };
    let (cfg, out) = load(src)?;
    std::fs::create_dir_all(&out).map_err(|e| ConfigError(format!("{}: {e}", out.display())))?;
    log::info!("writing to {}", out.display());
    cmd(&cfg, &out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
