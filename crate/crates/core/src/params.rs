//! Problem parameters shared by every module: the star graph, the branch of
//! standing waves and the numerical tolerances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A star graph of `n` half-lines glued at a vertex carrying a delta
/// interaction of strength `alpha`, with power nonlinearity `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
}

/// Frequency `omega` and branch index `k` of a standing wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchParams {
    pub omega: f64,
    #[serde(rename = "K")]
    pub k: usize,
}

impl GraphConfig {
    pub fn new(n: usize, alpha: f64, p: f64) -> Result<Self> {
        let cfg = Self { n, alpha, p };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewEdges(self.n));
        }
        if self.alpha == 0.0 || !self.alpha.is_finite() {
            return Err(Error::ZeroAlpha);
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidPower(self.p));
        }
        Ok(())
    }

    /// Largest admissible branch index, `floor((N-1)/2)`.
    pub fn max_branch(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Existence threshold `alpha^2 / (N-2K)^2` of branch `k`.
    pub fn threshold(&self, k: usize) -> f64 {
        let m = self.n as f64 - 2.0 * k as f64;
        self.alpha * self.alpha / (m * m)
    }

    pub fn attractive(&self) -> bool {
        self.alpha < 0.0
    }
}

impl BranchParams {
    pub fn new(omega: f64, k: usize) -> Self {
        Self { omega, k }
    }
}

/// Checks every invariant of a (graph, branch) pair.
pub fn validate(config: &GraphConfig, branch: &BranchParams) -> Result<()> {
    config.check()?;
    let max = config.max_branch();
    if branch.k > max {
        return Err(Error::BranchOutOfRange { k: branch.k, max });
    }
    let threshold = config.threshold(branch.k);
    if !(branch.omega > threshold && branch.omega.is_finite()) {
        return Err(Error::BelowThreshold {
            omega: branch.omega,
            threshold,
            k: branch.k,
        });
    }
    Ok(())
}

/// Maps the problem to `alpha -> t alpha`, `omega -> t^2 omega`.
///
/// Lengths scale by `1/t` and every eigenvalue of the linearized operators
/// scales by `t^2`.
pub fn rescale(
    config: &GraphConfig,
    branch: &BranchParams,
    t: f64,
) -> Result<(GraphConfig, BranchParams)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidScale(t));
    }
    validate(config, branch)?;
    Ok((
        GraphConfig {
            alpha: t * config.alpha,
            ..*config
        },
        BranchParams {
            omega: t * t * branch.omega,
            ..*branch
        },
    ))
}

/// Numerical tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSet {
    /// Relative bracket width at which bisection stops.
    pub root_tol: f64,
    /// Target relative accuracy of the shooting integrator; the RK4 step in
    /// the scaled variable `p sqrt(omega) x` is `ode_rel_tol^(1/4)`.
    pub ode_rel_tol: f64,
    /// Eigenvalues with `|lambda| <= zero_tol * omega` count as zero.
    pub zero_tol: f64,
    /// The far field starts where `Q(x) / (omega - lambda)` drops below this.
    pub far_field_cut: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            root_tol: 1e-11,
            ode_rel_tol: 1e-12,
            zero_tol: 1e-9,
            far_field_cut: 1e-14,
        }
    }
}

impl ToleranceSet {
    pub fn check(&self) -> Result<()> {
        for (name, value) in [
            ("root_tol", self.root_tol),
            ("ode_rel_tol", self.ode_rel_tol),
            ("zero_tol", self.zero_tol),
            ("far_field_cut", self.far_field_cut),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }

    /// Absolute zero threshold for frequency `omega`.
    pub fn zero_threshold(&self, omega: f64) -> f64 {
        self.zero_tol * omega
    }
}
