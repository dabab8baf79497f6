mod cache;
mod commands;
mod config;
mod error;
mod oracles;
mod output;
mod reproduce;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crackwave::context::ThresholdContext;

use crate::config::{Command, RunConfig};
use crate::error::{CliError, Result};

/// Trapped modes below the threshold of a cracked elastic strip or plate.
#[derive(Debug, Parser)]
#[command(name = "crackwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Flat `key = value` config file; flags given here take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Spatial dimension, 2 (strip) or 3 (plate).
    #[arg(long, global = true)]
    dimension: Option<String>,
    /// s | as | m=<int> | all.
    #[arg(long, global = true)]
    class: Option<String>,
    /// Crack lengths: "0.1,0.05,0.025" or "geom:<start>:<ratio>:<count>", descending.
    #[arg(long, global = true, allow_hyphen_values = true)]
    ell: Option<String>,
    /// Galerkin truncation per class.
    #[arg(long = "N", global = true)]
    n: Option<String>,
    /// Relative gap tolerance of the direct search.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// direct | bs | both.
    #[arg(long, global = true)]
    route: Option<String>,
    /// Worker threads for sweeps (0: all cores).
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Seed of randomized sample points.
    #[arg(long, global = true)]
    seed: Option<String>,
    /// on | off: reuse eigenvalue searches stored under <out>/cache.
    #[arg(long, global = true)]
    cache: Option<String>,
    /// Number of dispersion branches.
    #[arg(long, global = true)]
    branches: Option<String>,
    /// Wavenumber grid start:stop:step.
    #[arg(long, global = true)]
    xi: Option<String>,
    /// Real frequency (default Λ − delta).
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Imaginary part of the frequency for `symbol`.
    #[arg(long = "omega-im", global = true, allow_hyphen_values = true)]
    omega_im: Option<String>,
    /// Gap Λ − ω used by `symbol` and `assemble`.
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Eigenvalue table read by `fit` (default <out>/eigenvalues.csv).
    #[arg(long, global = true)]
    input: Option<String>,
    /// Validate and print the resolved configuration, then exit.
    #[arg(long = "dry-run", global = true)]
    dry_run: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Dispersion branches over a ξ grid, plus threshold data.
    Dispersion,
    /// Threshold Λ, κ, ζ₁″(κ) and the boundary stress of the threshold mode.
    Threshold,
    /// Dirichlet-to-Neumann symbol over a ξ grid.
    Symbol,
    /// Galerkin matrix of one class at one crack length.
    Assemble,
    /// Eigenvalues below the threshold per class and crack length.
    Solve,
    /// Power-law fits of an eigenvalue table.
    Fit,
    /// Asymptotic constants and their ingredients.
    Constants,
    /// Whole pipeline with an acceptance report.
    Reproduce,
}

impl Cmd {
    fn command(self) -> Command {
        match self {
            Cmd::Dispersion => Command::Dispersion,
            Cmd::Threshold => Command::Threshold,
            Cmd::Symbol => Command::Symbol,
            Cmd::Assemble => Command::Assemble,
            Cmd::Solve => Command::Solve,
            Cmd::Fit => Command::Fit,
            Cmd::Constants => Command::Constants,
            Cmd::Reproduce => Command::Reproduce,
        }
    }
}

fn settings(cli: &Cli) -> Result<BTreeMap<String, String>> {
    let mut s = match &cli.config {
        Some(p) => config::parse_config_file(p)?,
        None => BTreeMap::new(),
    };
    let flags = [
        ("dimension", &cli.dimension),
        ("class", &cli.class),
        ("ell", &cli.ell),
        ("N", &cli.n),
        ("tol", &cli.tol),
        ("out", &cli.out),
        ("route", &cli.route),
        ("workers", &cli.workers),
        ("seed", &cli.seed),
        ("cache", &cli.cache),
        ("branches", &cli.branches),
        ("xi", &cli.xi),
        ("omega", &cli.omega),
        ("omega_im", &cli.omega_im),
        ("delta", &cli.delta),
        ("input", &cli.input),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            s.insert(k.to_string(), v.clone());
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::from_settings(cli.command.command(), &settings(&cli)?)?;
    if cli.dry_run {
        let v = serde_json::to_value(&cfg).expect("config serializes");
        let text = serde_json::to_string_pretty(&v).expect("value serializes");
        // a closed pipe (`| head`) is not an error
        return match writeln!(std::io::stdout(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(error::io_err("<stdout>")(e)),
            _ => Ok(()),
        };
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    pool.install(|| {
        let ctx = ThresholdContext::shared()?;
        match cfg.command {
            Command::Dispersion => commands::dispersion(&cfg, ctx),
            Command::Threshold => commands::threshold(&cfg, ctx),
            Command::Symbol => commands::symbol(&cfg, ctx),
            Command::Assemble => commands::assemble(&cfg, ctx),
            Command::Solve => commands::solve(&cfg, ctx),
            Command::Fit => commands::fit(&cfg, ctx),
            Command::Constants => commands::constants(&cfg, ctx),
            Command::Reproduce => reproduce::reproduce(&cfg, ctx),
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crackwave: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
