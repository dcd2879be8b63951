//! Parameter grids for sweeps.

use serde::{Deserialize, Serialize};

use crate::params::{validate, BranchParams, GraphConfig};

/// A Cartesian sweep over `(N, alpha, p)` with frequencies given as multiples
/// of each branch's existence threshold `alpha^2/(N-2K)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub edges: Vec<usize>,
    pub alphas: Vec<f64>,
    pub powers: Vec<f64>,
    pub threshold_multiples: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            edges: vec![3, 4, 5, 6],
            alphas: vec![-2.0, -1.0, 1.0, 2.0],
            powers: vec![0.5, 1.0, 2.0, 3.0],
            threshold_multiples: vec![1.5, 4.0, 16.0],
        }
    }
}

impl SweepGrid {
    /// All valid `(config, branch)` pairs, in a fixed order.
    pub fn configurations(&self) -> Vec<(GraphConfig, BranchParams)> {
        let mut out = Vec::new();
        for &n in &self.edges {
            for &alpha in &self.alphas {
                for &p in &self.powers {
                    let config = GraphConfig { n, alpha, p };
                    for k in 0..=config.max_branch() {
                        for &m in &self.threshold_multiples {
                            let branch = BranchParams::new(m * config.threshold(k), k);
                            if validate(&config, &branch).is_ok() {
                                out.push((config, branch));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
