//! Brute-force check of the index counts: the linearized operators are
//! discretized by finite elements and their eigenvalues below a shift are
//! counted from the pivot signs of a sparse symmetric factorization.
//!
//! `L+-` act as `-u'' + omega u - V u` with `V = (2p+1)(p+1) Phi^(2p)` for
//! `L+` and `V = (p+1) Phi^(2p)` for `L-`. The vertex condition enters the
//! quadratic form as `alpha u(0)^2`. By default `Phi` is the discrete standing
//! wave (the exact profile refined by Newton's method on the same mesh), so
//! the discrete `L-` annihilates it exactly and its kernel can be resolved at
//! round-off level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Mesh;
use crate::params::{validate, BranchParams, GraphConfig, ToleranceSet};
use crate::spectral::SpectralReport;
use crate::star::{StarMatrix, StarVector};
use crate::stationary::{build_state, StationaryState};

/// Pivot magnitude, relative to the largest diagonal entry, treated as zero.
const TINY_PIVOT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Which {
    #[serde(rename = "Lplus")]
    Plus,
    #[serde(rename = "Lminus")]
    Minus,
}

impl Which {
    /// Coefficient `c` in `V = c Phi^(2p)`.
    pub fn coefficient(self, p: f64) -> f64 {
        match self {
            Which::Plus => (2.0 * p + 1.0) * (p + 1.0),
            Which::Minus => p + 1.0,
        }
    }
}

/// Where the potential comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    /// Nodal values of the closed-form profile.
    Exact,
    /// Solution of the discrete stationary equation on the same mesh.
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaResult {
    pub shift: f64,
    pub count_below: usize,
}

/// The pencil `(A, B)` with `A` the stiffness plus potential and `B` the
/// lumped mass matrix.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub config: GraphConfig,
    pub branch: BranchParams,
    pub which: Which,
    pub mesh: Mesh,
    pub stiffness: StarMatrix<f64>,
    pub mass_matrix: StarVector<f64>,
    profile: StarVector<f64>,
}

/// Minimum truncation length `|a_K| + 20/(p sqrt(omega))`.
pub fn minimum_edge_length(config: &GraphConfig, branch: &BranchParams) -> f64 {
    crate::stationary::edge_shift(config, branch).abs() + 20.0 / (config.p * branch.omega.sqrt())
}

/// Solves `K u + omega B u - (p+1) B |u|^(2p) u = 0` by Newton's method
/// starting from `guess`. The Jacobian is the discrete `L+`.
pub fn discrete_stationary(
    mesh: &Mesh,
    config: &GraphConfig,
    omega: f64,
    guess: &StarVector<f64>,
) -> Result<StarVector<f64>> {
    let p = config.p;
    let b = mesh.lumped_mass();
    let base = mesh.stiffness(config.alpha).add_diagonal(omega, &b);
    let mut u = guess.clone();
    let scale = u.max_modulus();
    // the update bottoms out at a round-off floor near 1e-13 relative;
    // stop there once the quadratic phase is over
    let mut previous = f64::INFINITY;
    for _ in 0..30 {
        let pow = u.map(|x| x.abs().powf(2.0 * p));
        let nonlinear = u.zip_map(&pow, |x, w| x * w).zip_map(&b, |x, w| x * w);
        let mut residual = base.mul_vec(&u);
        residual.axpy(-(p + 1.0), &nonlinear);
        let jac_diag = pow.zip_map(&b, |w, m| -(2.0 * p + 1.0) * (p + 1.0) * w * m);
        let jac = base.add_diagonal(1.0, &jac_diag);
        let delta = jac.factor(TINY_PIVOT)?.solve(&residual);
        u.axpy(-1.0, &delta);
        let size = delta.max_modulus() / scale;
        if size <= 1e-14 || (size < 1e-10 && size > 0.1 * previous) {
            return Ok(u);
        }
        previous = size;
    }
    Err(Error::SolverFailure(
        "discrete standing wave: Newton did not converge".into(),
    ))
}

impl DiscreteOperator {
    /// Builds the operator with the default (discrete) profile.
    pub fn assemble(
        config: &GraphConfig,
        branch: &BranchParams,
        which: Which,
        edge_length: f64,
        intervals: usize,
    ) -> Result<Self> {
        Self::assemble_with(
            config,
            branch,
            which,
            edge_length,
            intervals,
            ProfileSource::Discrete,
        )
    }

    pub fn assemble_with(
        config: &GraphConfig,
        branch: &BranchParams,
        which: Which,
        edge_length: f64,
        intervals: usize,
        source: ProfileSource,
    ) -> Result<Self> {
        validate(config, branch)?;
        let required = minimum_edge_length(config, branch);
        if edge_length < required {
            return Err(Error::DomainTooShort {
                length: edge_length,
                required,
            });
        }
        if intervals < 200 {
            return Err(Error::TooFewNodes {
                got: intervals,
                required: 200,
            });
        }
        let state = build_state(config, branch)?;
        let mesh = Mesh::new(config.n, edge_length, intervals)?;
        let exact = mesh.sample(|j, x| state.value(j, x));
        let profile = match source {
            ProfileSource::Exact => exact,
            ProfileSource::Discrete => discrete_stationary(&mesh, config, branch.omega, &exact)?,
        };
        Ok(Self::from_profile(config, branch, which, mesh, profile))
    }

    fn from_profile(
        config: &GraphConfig,
        branch: &BranchParams,
        which: Which,
        mesh: Mesh,
        profile: StarVector<f64>,
    ) -> Self {
        let b = mesh.lumped_mass();
        let c = which.coefficient(config.p);
        let potential = profile.map(|x| c * x.abs().powf(2.0 * config.p));
        let weighted = potential.zip_map(&b, |v, m| -v * m);
        let stiffness = mesh
            .stiffness(config.alpha)
            .add_diagonal(branch.omega, &b)
            .add_diagonal(1.0, &weighted);
        Self {
            config: *config,
            branch: *branch,
            which,
            mesh,
            stiffness,
            mass_matrix: b,
            profile,
        }
    }

    /// `-u'' + omega u` with vertex strength `alpha` (zero allowed) and no
    /// potential. Bypasses validation; used to check the discretization.
    pub fn free(
        edges: usize,
        alpha: f64,
        omega: f64,
        edge_length: f64,
        intervals: usize,
    ) -> Result<Self> {
        let mesh = Mesh::new(edges, edge_length, intervals)?;
        let config = GraphConfig {
            n: edges,
            alpha,
            p: 1.0,
        };
        let branch = BranchParams::new(omega, 0);
        let zero = mesh.zeros();
        Ok(Self::from_profile(
            &config,
            &branch,
            Which::Minus,
            mesh,
            zero,
        ))
    }

    /// The profile `Phi` the potential was built from.
    pub fn profile(&self) -> &StarVector<f64> {
        &self.profile
    }

    pub fn step(&self) -> f64 {
        self.mesh.step()
    }

    /// Relabels the edges; the spectrum is unchanged.
    pub fn permute_edges(&self, perm: &[usize]) -> Self {
        let pm = |v: &Vec<Vec<f64>>| perm.iter().map(|&j| v[j].clone()).collect::<Vec<_>>();
        let mut out = self.clone();
        out.stiffness.coupling = perm.iter().map(|&j| self.stiffness.coupling[j]).collect();
        out.stiffness.diag = pm(&self.stiffness.diag);
        out.stiffness.off = pm(&self.stiffness.off);
        out.mass_matrix = self.mass_matrix.permute_edges(perm);
        out.profile = self.profile.permute_edges(perm);
        out
    }

    fn shifted(&self, shift: f64) -> StarMatrix<f64> {
        self.stiffness.add_diagonal(-shift, &self.mass_matrix)
    }

    /// Number of pencil eigenvalues below `shift`.
    pub fn inertia(&self, shift: f64) -> Result<InertiaResult> {
        let count_below = self.shifted(shift).factor(TINY_PIVOT)?.negative_pivots();
        Ok(InertiaResult { shift, count_below })
    }

    /// [`DiscreteOperator::inertia`], nudging the shift upward when it hits an
    /// eigenvalue.
    pub fn count_below(&self, shift: f64) -> Result<usize> {
        let scale = self.branch.omega.max(shift.abs());
        let mut nudge = 1e-13 * scale;
        let mut s = shift;
        for _ in 0..8 {
            match self.inertia(s) {
                Ok(r) => return Ok(r.count_below),
                Err(Error::SingularShift(_)) => {
                    s = shift + nudge;
                    nudge *= 10.0;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::SingularShift(shift))
    }

    fn eigen_tol(&self, lambda: f64) -> f64 {
        1e-13 * self.branch.omega.max(lambda.abs())
    }

    /// All pencil eigenvalues below `upper` with multiplicity, ascending, by
    /// bisection on inertia counts.
    pub fn eigenvalues_below(&self, upper: f64, max_count: usize) -> Result<Vec<f64>> {
        let total = self.count_below(upper)?;
        if total > max_count {
            return Err(Error::MaxCountExceeded {
                count: total,
                upper,
                max: max_count,
            });
        }
        let mut out = Vec::with_capacity(total);
        if total == 0 {
            return Ok(out);
        }
        let lo = self.stiffness.pencil_lower_bound(&self.mass_matrix) - self.eigen_tol(upper);
        let mut stack = vec![(lo, 0usize, upper, total)];
        while let Some((a, ca, b, cb)) = stack.pop() {
            if cb == ca {
                continue;
            }
            let mid = 0.5 * (a + b);
            if b - a <= self.eigen_tol(mid) || mid <= a || mid >= b {
                out.extend(std::iter::repeat(mid).take(cb - ca));
                continue;
            }
            let cm = self.count_below(mid)?;
            // push the upper half first so the lower half pops first
            stack.push((mid, cm, b, cb));
            stack.push((a, ca, mid, cm));
        }
        Ok(out)
    }

    /// Eigenpairs below `upper`; eigenvectors are orthonormal in the lumped
    /// mass inner product, with the larger of the vertex value and the
    /// largest entry made positive.
    pub fn eigenpairs_below(
        &self,
        upper: f64,
        max_count: usize,
    ) -> Result<Vec<(f64, StarVector<f64>)>> {
        let values = self.eigenvalues_below(upper, max_count)?;
        let mut pairs: Vec<(f64, StarVector<f64>)> = Vec::with_capacity(values.len());
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut start = 0;
        while start < values.len() {
            let lead = values[start];
            let mut end = start + 1;
            while end < values.len()
                && values[end] - lead <= 1e-8 * self.branch.omega.max(lead.abs())
            {
                end += 1;
            }
            let cluster = self.inverse_iteration(lead, end - start, &pairs, &mut rng)?;
            for (k, v) in cluster.into_iter().enumerate() {
                pairs.push((values[start + k], v));
            }
            start = end;
        }
        Ok(pairs)
    }

    fn b_dot(&self, a: &StarVector<f64>, b: &StarVector<f64>) -> f64 {
        a.weighted_dot(&self.mass_matrix, b)
    }

    fn orthonormalize(&self, v: &mut StarVector<f64>, against: &[&StarVector<f64>]) -> Result<()> {
        for _ in 0..2 {
            for u in against {
                let c = self.b_dot(u, v);
                v.axpy(-c, u);
            }
        }
        let norm = self.b_dot(v, v).sqrt();
        if !(norm > 0.0) {
            return Err(Error::SolverFailure("inverse iteration lost rank".into()));
        }
        v.scale(1.0 / norm);
        Ok(())
    }

    fn inverse_iteration(
        &self,
        lambda: f64,
        size: usize,
        previous: &[(f64, StarVector<f64>)],
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<StarVector<f64>>> {
        let scale = self.branch.omega.max(lambda.abs());
        let mut offset = 1e-9 * scale;
        let factor = loop {
            match self.shifted(lambda - offset).factor(TINY_PIVOT) {
                Ok(f) => break f,
                Err(Error::SingularShift(_)) if offset < 1e-4 * scale => offset *= 10.0,
                Err(e) => return Err(e),
            }
        };
        let mut block: Vec<StarVector<f64>> = (0..size)
            .map(|_| {
                let mut v = self.mesh.zeros::<f64>();
                for x in v.iter_mut() {
                    *x = rng.gen_range(-1.0..1.0);
                }
                v
            })
            .collect();
        for _ in 0..4 {
            for k in 0..size {
                let rhs = block[k].zip_map(&self.mass_matrix, |x, w| x * w);
                let mut v = factor.solve(&rhs);
                let against: Vec<&StarVector<f64>> = previous
                    .iter()
                    .map(|(_, u)| u)
                    .chain(block[..k].iter())
                    .collect();
                self.orthonormalize(&mut v, &against)?;
                block[k] = v;
            }
        }
        for v in &mut block {
            let peak = v
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let pick = if v.vertex.abs() > 1e-6 * peak.abs() {
                v.vertex
            } else {
                peak
            };
            if pick < 0.0 {
                v.scale(-1.0);
            }
        }
        Ok(block)
    }

    /// Relative discrete `L2` distance between the directions of `u` and the
    /// closed-form profile, after sign alignment.
    pub fn distance_to_state(&self, u: &StarVector<f64>, state: &StationaryState) -> f64 {
        let phi = self.mesh.sample(|j, x| state.value(j, x));
        let nphi = self.b_dot(&phi, &phi).sqrt();
        let nu = self.b_dot(u, u).sqrt();
        let sign = self.b_dot(&phi, u).signum();
        let diff = phi.zip_map(u, |a, b| a / nphi - sign * b / nu);
        self.b_dot(&diff, &diff).sqrt()
    }
}

impl DiscreteOperator {
    /// Multiplicity of the oracle eigenvalue cluster nearest `target`, from the
    /// jump of the inertia count across a window that excludes every other
    /// eigenvalue in `eigenvalues` (sorted, with multiplicity). Returns the
    /// cluster value and the jump.
    pub fn multiplicity_near(&self, target: f64, eigenvalues: &[f64]) -> Result<(f64, usize)> {
        let nearest = eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
            .ok_or_else(|| Error::InvalidArgument("no eigenvalues to search".into()))?;
        let same = 1e-8 * self.branch.omega.max(nearest.abs());
        let gap = eigenvalues
            .iter()
            .map(|&e| (e - nearest).abs())
            .filter(|&d| d > same)
            .fold(0.5 * self.branch.omega, f64::min);
        let half = 0.5 * gap;
        let jump = self.count_below(nearest + half)? - self.count_below(nearest - half)?;
        Ok((nearest, jump))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounts {
    pub n: usize,
    pub z: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub config: GraphConfig,
    pub branch: BranchParams,
    pub which: Which,
    #[serde(rename = "L")]
    pub edge_length: f64,
    #[serde(rename = "M")]
    pub intervals: usize,
    pub counts: OracleCounts,
    /// Eigenvalues at or below `zero_tol`, with multiplicity.
    pub eigenvalues: Vec<f64>,
}

impl DiscreteOperator {
    /// Counts below `-zero_tol` and inside `[-zero_tol, zero_tol]`, plus the
    /// eigenvalues up to `zero_tol`.
    pub fn report(&self, tol: &ToleranceSet, max_count: usize) -> Result<OracleReport> {
        let zt = tol.zero_threshold(self.branch.omega);
        let n = self.count_below(-zt)?;
        let up_to = self.count_below(zt)?;
        Ok(OracleReport {
            config: self.config,
            branch: self.branch,
            which: self.which,
            edge_length: self.mesh.length,
            intervals: self.mesh.intervals,
            counts: OracleCounts { n, z: up_to - n },
            eigenvalues: self.eigenvalues_below(zt, max_count)?,
        })
    }

    /// Eigenvalue agreement tolerance `max(1e-4 omega, 5 h^2 omega)`.
    pub fn agreement_tolerance(&self) -> f64 {
        let h = self.step();
        self.branch.omega * 1e-4f64.max(5.0 * h * h)
    }
}

/// Oracle settings used by the CLI and the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Edge length; `None` selects `|a_K| + 25/(p sqrt(omega))`.
    pub edge_length: Option<f64>,
    pub intervals: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            edge_length: None,
            intervals: 2000,
        }
    }
}

impl OracleSettings {
    pub fn edge_length_for(&self, config: &GraphConfig, branch: &BranchParams) -> f64 {
        self.edge_length.unwrap_or_else(|| {
            crate::stationary::edge_shift(config, branch).abs()
                + 25.0 / (config.p * branch.omega.sqrt())
        })
    }
}

/// Eigenvalues below `upper` on the mesh of `coarse` and on a mesh with twice
/// as many cells, combined as `(4 fine - coarse) / 3`. Removes the `h^2`
/// term of the discretization error.
pub fn richardson_eigenvalues(
    coarse: &DiscreteOperator,
    upper: f64,
    max_count: usize,
) -> Result<Vec<f64>> {
    let fine = DiscreteOperator::assemble(
        &coarse.config,
        &coarse.branch,
        coarse.which,
        coarse.mesh.length,
        2 * coarse.mesh.intervals,
    )?;
    let a = coarse.eigenvalues_below(upper, max_count)?;
    let b = fine.eigenvalues_below(upper, max_count)?;
    if a.len() != b.len() {
        return Err(Error::SolverFailure(format!(
            "eigenvalue count changed under refinement: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(&b).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
}

fn max_pairwise_error(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Outcome of comparing the shooting report with the oracle for `L+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub counts_match: bool,
    /// Largest `|analytic - oracle|` over sorted eigenvalues with
    /// multiplicity, oracle values extrapolated in `h`.
    pub max_eigenvalue_error: f64,
    /// The same with the raw eigenvalues of the base mesh.
    pub max_eigenvalue_error_raw: f64,
    pub tolerance: f64,
    pub analytic: Vec<f64>,
    pub oracle: Vec<f64>,
    pub oracle_extrapolated: Vec<f64>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.counts_match && self.max_eigenvalue_error <= self.tolerance
    }
}

/// Compares the analytic `L+` spectrum with the oracle's spectrum at or
/// below `zero_tol`.
pub fn compare(
    report: &SpectralReport,
    plus: &DiscreteOperator,
    oracle: &OracleReport,
    tol: &ToleranceSet,
) -> Result<Comparison> {
    let analytic = report.expanded();
    let counts_match = oracle.counts.n == report.n_lplus && oracle.counts.z == report.z_lplus;
    let upper = tol.zero_threshold(plus.branch.omega);
    let extrapolated = richardson_eigenvalues(plus, upper, oracle.eigenvalues.len().max(1))?;
    Ok(Comparison {
        counts_match,
        max_eigenvalue_error: max_pairwise_error(&analytic, &extrapolated),
        max_eigenvalue_error_raw: max_pairwise_error(&analytic, &oracle.eigenvalues),
        tolerance: plus.agreement_tolerance(),
        analytic,
        oracle: oracle.eigenvalues.clone(),
        oracle_extrapolated: extrapolated,
    })
}
