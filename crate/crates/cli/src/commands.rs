use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;
use starnls::dynamics::{instability_experiment, EvolutionTrace, ExperimentSettings, StopReason};
use starnls::export::{
    f_curve_rows, linspace, profile_rows, shooting_rows, trace_rows, write_csv, write_json,
};
use starnls::oracle::{compare, Comparison, DiscreteOperator, OracleReport, Which};
use starnls::spectral::{SpectralProblem, SpectralReport};
use starnls::stationary::build_state;
use starnls::sweep::run_sweep;
use starnls::{BranchParams, GraphConfig};

use crate::config::RunConfig;

/// Files written by a command, and whether an oracle comparison failed.
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub mismatch: bool,
}

struct Sink {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Sink {
    fn new(dir: PathBuf) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> anyhow::Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> anyhow::Result<()> {
        write_csv(rows, self.create(name)?)?;
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        write_json(value, self.create(name)?)?;
        Ok(())
    }

    fn done(self, mismatch: bool) -> Outcome {
        Outcome {
            written: self.written,
            mismatch,
        }
    }
}

pub fn states(run: &RunConfig) -> anyhow::Result<Outcome> {
    let (config, branch) = run.problem()?;
    let state = build_state(&config, &branch)?;
    let length = run
        .edge_length
        .unwrap_or_else(|| state.default_edge_length());
    let mut sink = Sink::new(run.out_dir())?;
    sink.csv(
        "profile.csv",
        &profile_rows(&state, length, run.grid_m.unwrap_or(2000)),
    )?;
    sink.json("state.json", &state)?;
    Ok(sink.done(false))
}

pub fn spectrum(run: &RunConfig) -> anyhow::Result<Outcome> {
    let (config, branch) = run.problem()?;
    let problem = SpectralProblem::new(&config, &branch, run.tolerances()?)?;
    let report = problem.report()?;
    let mut lambdas = linspace(2.0 * report.lambda0, 0.0, 401);
    if let Some(pole) = report.pole {
        lambdas.push(pole);
        lambdas.sort_by(f64::total_cmp);
    }
    let kappa = config.p * branch.omega.sqrt();
    let xs = linspace(-5.0 / kappa, 10.0 / kappa, 301);
    let probes: Vec<f64> = [0.9, 0.5, 0.1, 0.0]
        .iter()
        .map(|s| s * report.lambda0)
        .collect();
    let mut sink = Sink::new(run.out_dir())?;
    sink.json("spectrum.json", &report)?;
    sink.csv(
        "f_curve.csv",
        &f_curve_rows(&problem, &lambdas, report.pole)?,
    )?;
    sink.csv(
        "shooting.csv",
        &shooting_rows(problem.shooter(), &probes, &xs)?,
    )?;
    Ok(sink.done(false))
}

#[derive(Serialize)]
struct OracleOutput {
    #[serde(rename = "Lplus")]
    plus: OracleReport,
    #[serde(rename = "Lminus")]
    minus: OracleReport,
    analytic: SpectralReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agree: Option<bool>,
}

pub fn oracle(run: &RunConfig, check: bool) -> anyhow::Result<Outcome> {
    let (config, branch) = run.problem()?;
    let tol = run.tolerances()?;
    let settings = run.oracle_settings();
    let length = settings.edge_length_for(&config, &branch);
    let analytic = SpectralProblem::new(&config, &branch, tol)?.report()?;
    let plus_op =
        DiscreteOperator::assemble(&config, &branch, Which::Plus, length, settings.intervals)?;
    let minus_op =
        DiscreteOperator::assemble(&config, &branch, Which::Minus, length, settings.intervals)?;
    let max_count = config.n + 4;
    let plus = plus_op.report(&tol, max_count)?;
    let minus = minus_op.report(&tol, max_count)?;
    let comparison = if check {
        Some(compare(&analytic, &plus_op, &plus, &tol)?)
    } else {
        None
    };
    let agree = comparison.as_ref().map(|c| {
        c.passed() && minus.counts.n == analytic.n_lminus && minus.counts.z == analytic.z_lminus
    });
    let mut sink = Sink::new(run.out_dir())?;
    sink.json(
        "oracle.json",
        &OracleOutput {
            plus,
            minus,
            analytic,
            comparison,
            agree,
        },
    )?;
    Ok(sink.done(agree == Some(false)))
}

#[derive(Serialize)]
struct EvolveSummary {
    config: GraphConfig,
    branch: BranchParams,
    settings: ExperimentSettings,
    stop: StopReason,
    growth_factor: f64,
    time_to_growth_10: Option<f64>,
    max_relative_mass_drift: f64,
    max_relative_energy_drift: f64,
}

fn summary(config: GraphConfig, branch: BranchParams, trace: &EvolutionTrace) -> EvolveSummary {
    EvolveSummary {
        config,
        branch,
        settings: trace.settings,
        stop: trace.stop,
        growth_factor: trace.growth_factor(),
        time_to_growth_10: trace.time_to_growth(10.0),
        max_relative_mass_drift: trace.max_relative_mass_drift(),
        max_relative_energy_drift: trace.max_relative_energy_drift(),
    }
}

pub fn evolve(run: &RunConfig) -> anyhow::Result<Outcome> {
    let (config, branch) = run.problem()?;
    let trace = instability_experiment(&config, &branch, &run.experiment_settings())?;
    let mut sink = Sink::new(run.out_dir())?;
    sink.csv("trace.csv", &trace_rows(&trace))?;
    sink.json("evolve.json", &summary(config, branch, &trace))?;
    Ok(sink.done(false))
}

pub fn sweep(run: &RunConfig, with_oracle: bool) -> anyhow::Result<Outcome> {
    let grid = run.grid.clone().unwrap_or_default();
    let settings = run.oracle_settings();
    let rows = run_sweep(&grid, &run.tolerances()?, with_oracle.then_some(&settings))?;
    let mismatch = rows.iter().any(|r| !r.agrees);
    let mut sink = Sink::new(run.out_dir())?;
    sink.csv("sweep.csv", &rows)?;
    Ok(sink.done(mismatch))
}
