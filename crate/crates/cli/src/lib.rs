//! Command-line reports for the mereo toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mereo_core::search::SearchConfig;
use mereo_core::SystemDims;

pub mod commands;
pub mod io;

use commands::{ConventionFlag, Outcome};
use io::{GammaSource, Preset};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] mereo_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

#[derive(Debug, Parser)]
#[command(name = "mereo", version, about = "Holism certification and commutant search for bipartite properties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether |Γ⟩⟩⟨⟨Γ| is holistic, with replayed witnesses.
    Certify {
        #[command(flatten)]
        gamma: GammaArgs,
        #[arg(long, value_enum, default_value = "bothreport")]
        convention: ConventionFlag,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Minimize the product-property commutator numerically.
    Search {
        #[command(flatten)]
        gamma: GammaArgs,
        #[arg(long, default_value_t = 1)]
        rank_p: usize,
        #[arg(long, default_value_t = 1)]
        rank_q: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 0.5)]
        step_init: f64,
        #[arg(long, default_value_t = 1e-12)]
        grad_tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Penalize pairs with ‖PΓQᵀ‖ below the exclusion floor.
        #[arg(long)]
        exclude_exclusive: bool,
        /// Compare with the Bloch-grid scan (2x2, rank-1 pairs only).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 48)]
        grid_resolution: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Fraction of Ginibre-sampled Γ certified holistic.
    Density {
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Mutually exclusive holistic properties completed from Γ.
    Lattice {
        #[command(flatten)]
        gamma: GammaArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Entropy of the whole and of a part.
    Entropy {
        #[command(flatten)]
        gamma: GammaArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Worked property examples and the projector/operation roundtrip.
    Demo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
#[group(skip)]
pub struct GammaArgs {
    /// JSON matrix {rows, cols, re, im}.
    #[arg(long, group = "gamma_source")]
    gamma: Option<PathBuf>,
    #[arg(long, value_enum, group = "gamma_source")]
    preset: Option<Preset>,
    /// Ginibre Γ from this seed; needs --dims.
    #[arg(long, requires = "dims", group = "gamma_source")]
    random_seed: Option<u64>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], requires = "random_seed")]
    dims: Option<Vec<usize>>,
}

impl GammaArgs {
    fn source(&self) -> Result<GammaSource, CliError> {
        if let Some(path) = &self.gamma {
            return Ok(GammaSource::File { path: path.clone() });
        }
        if let Some(name) = self.preset {
            return Ok(GammaSource::Preset { name });
        }
        match (self.random_seed, &self.dims) {
            (Some(seed), Some(d)) => Ok(GammaSource::Random { seed, dims: parse_dims(d)? }),
            _ => Err(CliError::Input("one of --gamma, --preset or --random-seed with --dims is required".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol_rank: Option<f64>,
}

fn parse_dims(d: &[usize]) -> Result<SystemDims, CliError> {
    SystemDims::for_holism(d[0], d[1]).map_err(CliError::from)
}

fn dispatch(cmd: &Command) -> Result<(Outcome, &CommonArgs), CliError> {
    match cmd {
        Command::Certify { gamma, convention, common } => {
            let tol = io::tolerances(common.tol_rank)?;
            Ok((commands::certify(&gamma.source()?, *convention, &tol)?, common))
        }
        Command::Search {
            gamma,
            rank_p,
            rank_q,
            restarts,
            max_iters,
            step_init,
            grad_tol,
            seed,
            exclude_exclusive,
            oracle,
            grid_resolution,
            common,
        } => {
            let tol = io::tolerances(common.tol_rank)?;
            let cfg = SearchConfig {
                rank_p: *rank_p,
                rank_q: *rank_q,
                restarts: *restarts,
                max_iters: *max_iters,
                step_init: *step_init,
                grad_tol: *grad_tol,
                exclude_exclusive: *exclude_exclusive,
                rng_seed: *seed,
            };
            let oracle = oracle.then_some(*grid_resolution);
            Ok((commands::search(&gamma.source()?, &cfg, oracle, &tol)?, common))
        }
        Command::Density { dims, samples, seed, csv, common } => {
            let tol = io::tolerances(common.tol_rank)?;
            let dims = parse_dims(dims)?;
            Ok((commands::density(dims, *samples, *seed, csv.as_deref(), &tol)?, common))
        }
        Command::Lattice { gamma, k, seed, common } => {
            let tol = io::tolerances(common.tol_rank)?;
            Ok((commands::lattice(&gamma.source()?, *k, *seed, &tol)?, common))
        }
        Command::Entropy { gamma, common } => {
            let tol = io::tolerances(common.tol_rank)?;
            Ok((commands::entropy(&gamma.source()?, &tol)?, common))
        }
        Command::Demo { seed, common } => {
            let tol = io::tolerances(common.tol_rank)?;
            Ok((commands::demo(*seed, &tol)?, common))
        }
    }
}

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;

/// Runs a parsed command: JSON report to `--out` or stdout, summary and
/// violations to stderr.
pub fn run(cli: Cli) -> ExitCode {
    let (outcome, common) = match dispatch(&cli.command) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("mereo: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let json = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("mereo: {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT);
            }
        }
        None => println!("{json}"),
    }
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    if outcome.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        for v in &outcome.violations {
            eprintln!("invariant violation: {v}");
        }
        ExitCode::from(EXIT_INVARIANT)
    }
}
