//! Run configuration: a JSON document whose fields the command-line flags
//! override.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use starnls::dynamics::{Direction, ExperimentSettings};
use starnls::oracle::OracleSettings;
use starnls::{validate, BranchParams, GraphConfig, SweepGrid, ToleranceSet};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSet>,
    /// Sweep grid; defaults to the acceptance grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SweepGrid>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(self, other: RunConfig) -> RunConfig {
        RunConfig {
            n: other.n.or(self.n),
            k: other.k.or(self.k),
            alpha: other.alpha.or(self.alpha),
            omega: other.omega.or(self.omega),
            p: other.p.or(self.p),
            seed: other.seed.or(self.seed),
            out: other.out.or(self.out),
            grid_m: other.grid_m.or(self.grid_m),
            edge_length: other.edge_length.or(self.edge_length),
            dt: other.dt.or(self.dt),
            t_final: other.t_final.or(self.t_final),
            eps: other.eps.or(self.eps),
            direction: other.direction.or(self.direction),
            tolerances: other.tolerances.or(self.tolerances),
            grid: other.grid.or(self.grid),
        }
    }

    /// The validated problem. `p` defaults to 1 and `K` to 0.
    pub fn problem(&self) -> anyhow::Result<(GraphConfig, BranchParams)> {
        let (Some(n), Some(alpha), Some(omega)) = (self.n, self.alpha, self.omega) else {
            bail!("--n, --alpha and --omega are required (on the command line or in --config)");
        };
        let config = GraphConfig::new(n, alpha, self.p.unwrap_or(1.0))?;
        let branch = BranchParams::new(omega, self.k.unwrap_or(0));
        validate(&config, &branch)?;
        Ok((config, branch))
    }

    pub fn tolerances(&self) -> anyhow::Result<ToleranceSet> {
        let tol = self.tolerances.unwrap_or_default();
        tol.check()?;
        Ok(tol)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn oracle_settings(&self) -> OracleSettings {
        let defaults = OracleSettings::default();
        OracleSettings {
            edge_length: self.edge_length,
            intervals: self.grid_m.unwrap_or(defaults.intervals),
        }
    }

    pub fn experiment_settings(&self) -> ExperimentSettings {
        let d = ExperimentSettings::default();
        ExperimentSettings {
            eps: self.eps.unwrap_or(d.eps),
            t_final: self.t_final.unwrap_or(d.t_final),
            dt: self.dt.unwrap_or(d.dt),
            edge_length: self.edge_length.or(d.edge_length),
            intervals: self.grid_m.unwrap_or(d.intervals),
            direction: self.direction.unwrap_or(d.direction),
            seed: self.seed.unwrap_or(d.seed),
            ..d
        }
    }
}
