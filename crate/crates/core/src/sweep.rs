//! Batch evaluation of the index counts over a parameter grid, optionally
//! cross-checked by the finite-element oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::SweepGrid;
use crate::oracle::{DiscreteOperator, OracleSettings, Which};
use crate::params::{BranchParams, GraphConfig, ToleranceSet};
use crate::spectral::{SpectralProblem, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub alpha: f64,
    pub p: f64,
    pub omega: f64,
    #[serde(rename = "n_Lplus_analytic")]
    pub n_lplus_analytic: usize,
    /// Empty when the oracle was not run.
    #[serde(rename = "n_Lplus_oracle")]
    pub n_lplus_oracle: Option<usize>,
    #[serde(rename = "z_Lplus")]
    pub z_lplus: usize,
    /// From the oracle when it ran, otherwise the analytic value.
    #[serde(rename = "n_Lminus")]
    pub n_lminus: usize,
    #[serde(rename = "z_Lminus")]
    pub z_lminus: usize,
    pub verdict: Verdict,
    /// Analytic count equals `K+1` (attractive) or `N-K` (repulsive), and the
    /// oracle counts agree when present.
    pub agrees: bool,
}

/// `K+1` for an attractive vertex, `N-K` for a repulsive one.
pub fn expected_morse_index(config: &GraphConfig, branch: &BranchParams) -> usize {
    if config.alpha < 0.0 {
        branch.k + 1
    } else {
        config.n - branch.k
    }
}

pub fn sweep_row(
    config: &GraphConfig,
    branch: &BranchParams,
    tol: &ToleranceSet,
    oracle: Option<&OracleSettings>,
) -> Result<SweepRow> {
    let report = SpectralProblem::new(config, branch, *tol)?.report()?;
    let mut row = SweepRow {
        n: config.n,
        k: branch.k,
        alpha: config.alpha,
        p: config.p,
        omega: branch.omega,
        n_lplus_analytic: report.n_lplus,
        n_lplus_oracle: None,
        z_lplus: report.z_lplus,
        n_lminus: report.n_lminus,
        z_lminus: report.z_lminus,
        verdict: report.verdict,
        agrees: report.n_lplus == expected_morse_index(config, branch) && report.z_lplus == 0,
    };
    if let Some(settings) = oracle {
        let length = settings.edge_length_for(config, branch);
        let plus =
            DiscreteOperator::assemble(config, branch, Which::Plus, length, settings.intervals)?;
        let minus =
            DiscreteOperator::assemble(config, branch, Which::Minus, length, settings.intervals)?;
        let zt = tol.zero_threshold(branch.omega);
        let n_plus = plus.count_below(-zt)?;
        let z_plus = plus.count_below(zt)? - n_plus;
        row.n_lplus_oracle = Some(n_plus);
        row.n_lminus = minus.count_below(-zt)?;
        row.z_lminus = minus.count_below(zt)? - row.n_lminus;
        row.agrees &= n_plus == report.n_lplus
            && z_plus == report.z_lplus
            && row.n_lminus == report.n_lminus
            && row.z_lminus == report.z_lminus;
    }
    Ok(row)
}

/// Runs every grid configuration on the rayon pool; rows keep grid order.
pub fn run_sweep(
    grid: &SweepGrid,
    tol: &ToleranceSet,
    oracle: Option<&OracleSettings>,
) -> Result<Vec<SweepRow>> {
    grid.configurations()
        .par_iter()
        .map(|(c, b)| sweep_row(c, b, tol, oracle))
        .collect()
}
