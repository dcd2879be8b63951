//! Command-line front end: argument parsing and the per-command drivers.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use starnls::dynamics::Direction;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "starnls",
    version,
    about = "Standing waves and their index counts on star graphs with a delta vertex"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Number of edges.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Branch index: edges carrying the shift toward the vertex.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Vertex strength; negative is attractive.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Frequency of the standing wave.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Nonlinearity power (default 1).
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for random perturbation directions.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Discretization {
    /// Cells per edge.
    #[arg(long)]
    pub grid_m: Option<usize>,
    /// Truncated edge length.
    #[arg(long)]
    pub edge_length: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary profile CSV and state JSON.
    States {
        #[command(flatten)]
        disc: Discretization,
    },
    /// Eigenvalue report JSON, F curve and shooting curves.
    Spectrum,
    /// Finite-element inertia counts for both linearized operators.
    Oracle {
        #[command(flatten)]
        disc: Discretization,
        /// Compare with the shooting counts; exit with status 2 on disagreement.
        #[arg(long)]
        compare: bool,
    },
    /// Perturbed standing-wave evolution trace.
    Evolve {
        #[command(flatten)]
        disc: Discretization,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// unstable_mode, kernel_adjacent or random.
        #[arg(long)]
        direction: Option<Direction>,
    },
    /// Index-count table over a parameter grid.
    Sweep {
        #[command(flatten)]
        disc: Discretization,
        /// Skip the finite-element cross-check.
        #[arg(long)]
        no_oracle: bool,
    },
}

impl Cli {
    /// The run configuration: the `--config` file overlaid with the flags.
    pub fn run_config(&self) -> anyhow::Result<RunConfig> {
        let base = match &self.common.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let c = &self.common;
        let mut flags = RunConfig {
            n: c.n,
            k: c.k,
            alpha: c.alpha,
            omega: c.omega,
            p: c.p,
            seed: c.seed,
            out: c.out.clone(),
            ..Default::default()
        };
        let disc = match &self.command {
            Command::States { disc }
            | Command::Oracle { disc, .. }
            | Command::Sweep { disc, .. } => Some(disc),
            Command::Evolve {
                disc,
                dt,
                t_final,
                eps,
                direction,
            } => {
                flags.dt = *dt;
                flags.t_final = *t_final;
                flags.eps = *eps;
                flags.direction = *direction;
                Some(disc)
            }
            Command::Spectrum => None,
        };
        if let Some(d) = disc {
            flags.grid_m = d.grid_m;
            flags.edge_length = d.edge_length;
        }
        Ok(base.overlay(flags))
    }

    pub fn execute(&self) -> anyhow::Result<commands::Outcome> {
        let run = self.run_config()?;
        match &self.command {
            Command::States { .. } => commands::states(&run),
            Command::Spectrum => commands::spectrum(&run),
            Command::Oracle { compare, .. } => commands::oracle(&run, *compare),
            Command::Evolve { .. } => commands::evolve(&run),
            Command::Sweep { no_oracle, .. } => commands::sweep(&run, !no_oracle),
        }
    }
}
