//! Closed-form standing waves `Phi_{omega,K}` on the star graph.
//!
//! Edges `0..K` carry `phi(x + a_K)` and edges `K..N` carry `phi(x - a_K)`,
//! with `phi(x) = omega^(1/2p) sech^(1/p)(p sqrt(omega) x)` and
//! `a_K = artanh(alpha / ((N-2K) sqrt(omega))) / (p sqrt(omega))`.
//!
//! The mass and energy functionals below are not written out in the
//! literature this crate follows; they are the conserved quantities implied
//! by the evolution equation `i psi_t = -psi'' - (p+1)|psi|^(2p) psi` with the
//! delta vertex condition:
//!
//! * mass `M = sum_j int |psi_j|^2`,
//! * energy `E = sum_j int |psi_j'|^2 + alpha |psi(0)|^2 - sum_j int |psi_j|^(2p+2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{validate, BranchParams, GraphConfig};
use crate::quadrature;

/// `ln sech(y)`, accurate for all `y`.
pub(crate) fn ln_sech(y: f64) -> f64 {
    let a = y.abs();
    std::f64::consts::LN_2 - a - (-2.0 * a).exp().ln_1p()
}

/// `sech^2(y)` without overflow.
pub(crate) fn sech2(y: f64) -> f64 {
    let e = (-2.0 * y.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// The whole-line soliton `phi_omega(x)`.
pub fn soliton_profile(p: f64, omega: f64, x: f64) -> f64 {
    let y = p * omega.sqrt() * x;
    (omega.ln() / (2.0 * p) + ln_sech(y) / p).exp()
}

/// `phi_omega'(x)`.
pub fn soliton_derivative(p: f64, omega: f64, x: f64) -> f64 {
    let y = p * omega.sqrt() * x;
    -omega.sqrt() * soliton_profile(p, omega, x) * y.tanh()
}

/// `phi_omega''(x)`.
pub fn soliton_second_derivative(p: f64, omega: f64, x: f64) -> f64 {
    let y = p * omega.sqrt() * x;
    let t = y.tanh();
    -omega * soliton_profile(p, omega, x) * (p * sech2(y) - t * t)
}

/// The edge shift `a_K`.
pub fn edge_shift(config: &GraphConfig, branch: &BranchParams) -> f64 {
    let root = branch.omega.sqrt();
    let m = config.n as f64 - 2.0 * branch.k as f64;
    (config.alpha / (m * root)).atanh() / (config.p * root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Non-monotone on the half-line: the maximum sits inside the edge.
    Bump,
    /// Monotone decreasing away from the vertex.
    Tail,
}

/// A standing-wave profile on the star graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryState {
    pub config: GraphConfig,
    pub branch: BranchParams,
    /// `a_K`.
    pub shift: f64,
    /// `omega^(1/2p)`, the height of the underlying soliton.
    pub amplitude: f64,
    /// Edge `j` carries `phi(x + edge_offsets[j])`.
    pub edge_offsets: Vec<f64>,
    pub edge_kind: Vec<EdgeKind>,
}

/// Builds `Phi_{omega,K}` after validating the parameters.
pub fn build_state(config: &GraphConfig, branch: &BranchParams) -> Result<StationaryState> {
    validate(config, branch)?;
    let shift = edge_shift(config, branch);
    let edge_offsets: Vec<f64> = (0..config.n)
        .map(|j| if j < branch.k { shift } else { -shift })
        .collect();
    let edge_kind = edge_offsets
        .iter()
        .map(|&s| {
            if soliton_derivative(config.p, branch.omega, s) > 0.0 {
                EdgeKind::Bump
            } else {
                EdgeKind::Tail
            }
        })
        .collect();
    Ok(StationaryState {
        config: *config,
        branch: *branch,
        shift,
        amplitude: branch.omega.powf(0.5 / config.p),
        edge_offsets,
        edge_kind,
    })
}

impl StationaryState {
    pub fn edges(&self) -> usize {
        self.edge_offsets.len()
    }

    pub fn value(&self, edge: usize, x: f64) -> f64 {
        soliton_profile(
            self.config.p,
            self.branch.omega,
            x + self.edge_offsets[edge],
        )
    }

    pub fn derivative(&self, edge: usize, x: f64) -> f64 {
        soliton_derivative(
            self.config.p,
            self.branch.omega,
            x + self.edge_offsets[edge],
        )
    }

    pub fn second_derivative(&self, edge: usize, x: f64) -> f64 {
        soliton_second_derivative(
            self.config.p,
            self.branch.omega,
            x + self.edge_offsets[edge],
        )
    }

    /// Common value of all edge profiles at the vertex.
    pub fn vertex_value(&self) -> f64 {
        self.value(0, 0.0)
    }

    /// `|sum_j phi_j'(0) - alpha phi(0)| / |alpha phi(0)|`.
    pub fn vertex_flux_residual(&self) -> f64 {
        let flux: f64 = (0..self.edges()).map(|j| self.derivative(j, 0.0)).sum();
        let target = self.config.alpha * self.vertex_value();
        (flux - target).abs() / target.abs()
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edge_kind.iter().filter(|&&k| k == kind).count()
    }

    /// Relabels the edges: edge `j` of the result is edge `perm[j]` of `self`.
    pub fn permute_edges(&self, perm: &[usize]) -> Result<Self> {
        let n = self.edges();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&j| j >= n || std::mem::replace(&mut seen[j], true))
        {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of {n} edges"
            )));
        }
        Ok(Self {
            edge_offsets: perm.iter().map(|&j| self.edge_offsets[j]).collect(),
            edge_kind: perm.iter().map(|&j| self.edge_kind[j]).collect(),
            ..self.clone()
        })
    }

    /// Default half-line truncation `|a_K| + 40 / (p sqrt(omega))`.
    pub fn default_edge_length(&self) -> f64 {
        self.shift.abs() + 40.0 / (self.config.p * self.branch.omega.sqrt())
    }

    /// Samples every edge on `intervals + 1` uniform nodes of `[0, length]`.
    pub fn sample(&self, length: f64, intervals: usize) -> EdgeSamples<f64> {
        let h = length / intervals as f64;
        EdgeSamples {
            length,
            edges: (0..self.edges())
                .map(|j| {
                    (0..=intervals)
                        .map(|i| self.value(j, i as f64 * h))
                        .collect()
                })
                .collect(),
        }
    }
}

/// Max over edges and grid points of `|-phi'' + omega phi - (p+1) phi^(2p+1)|`.
pub fn residual_stationary(state: &StationaryState, grid: &[f64]) -> f64 {
    let p = state.config.p;
    let omega = state.branch.omega;
    let mut worst: f64 = 0.0;
    for j in 0..state.edges() {
        for &x in grid {
            let phi = state.value(j, x);
            let r =
                -state.second_derivative(j, x) + omega * phi - (p + 1.0) * phi.powf(2.0 * p + 1.0);
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// A field sampled on `[0, length]` for every edge, vertex node included on
/// each edge (so the vertex continuity can be checked).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples<T> {
    pub length: f64,
    pub edges: Vec<Vec<T>>,
}

impl<T: Copy> EdgeSamples<T> {
    pub fn step(&self) -> f64 {
        self.length / (self.edges[0].len() - 1) as f64
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> EdgeSamples<U> {
        EdgeSamples {
            length: self.length,
            edges: self
                .edges
                .iter()
                .map(|e| e.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }
}

/// Converts a real field to a complex one.
pub fn complexify(field: &EdgeSamples<f64>) -> EdgeSamples<Complex64> {
    field.map(|v| Complex64::new(v, 0.0))
}

/// Total mass `sum_j int_0^L |psi_j|^2` by composite Simpson.
pub fn mass(field: &EdgeSamples<Complex64>) -> Result<f64> {
    let h = field.step();
    field
        .edges
        .iter()
        .map(|e| quadrature::simpson(&e.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(), h))
        .sum()
}

/// Energy functional; derivatives by second-order finite differences.
pub fn energy(field: &EdgeSamples<Complex64>, config: &GraphConfig) -> Result<f64> {
    let h = field.step();
    let vertex: Vec<Complex64> = field.edges.iter().map(|e| e[0]).collect();
    let scale = vertex.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if vertex.iter().any(|z| (z - vertex[0]).norm() > 1e-8 * scale) {
        return Err(Error::VertexMismatch(
            vertex.iter().map(|z| z.norm()).collect(),
        ));
    }
    let p = config.p;
    let mut total = config.alpha * vertex[0].norm_sqr();
    for e in &field.edges {
        let re: Vec<f64> = e.iter().map(|z| z.re).collect();
        let im: Vec<f64> = e.iter().map(|z| z.im).collect();
        let (dre, dim) = (
            quadrature::derivative(&re, h),
            quadrature::derivative(&im, h),
        );
        let kinetic: Vec<f64> = dre.iter().zip(&dim).map(|(a, b)| a * a + b * b).collect();
        let potential: Vec<f64> = e.iter().map(|z| z.norm_sqr().powf(p + 1.0)).collect();
        total += quadrature::simpson(&kinetic, h)? - quadrature::simpson(&potential, h)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(n: usize, alpha: f64, p: f64, omega: f64, k: usize) -> StationaryState {
        build_state(&GraphConfig { n, alpha, p }, &BranchParams::new(omega, k)).unwrap()
    }

    #[test]
    fn profile_examples() {
        assert_eq!(soliton_profile(1.0, 1.0, 0.0), 1.0);
        assert!((soliton_profile(1.0, 4.0, 0.0) - 2.0).abs() < 1e-15);
        // sech(1) = 2 / (e + 1/e)
        let e = std::f64::consts::E;
        let sech1 = 2.0 / (e + 1.0 / e);
        assert!((soliton_profile(1.0, 1.0, 1.0) - sech1).abs() < 1e-15);
        assert!((sech1 - 0.648054).abs() < 1e-6);
    }

    #[test]
    fn profile_is_even_and_decreasing() {
        for &(p, omega) in &[(0.5, 1.0), (1.0, 4.0), (3.0, 0.2)] {
            let mut prev = f64::INFINITY;
            for i in 0..200 {
                let x = i as f64 * 0.05;
                let v = soliton_profile(p, omega, x);
                assert_eq!(v, soliton_profile(p, omega, -x));
                assert!(v < prev);
                prev = v;
            }
        }
        // far tail stays finite and positive
        assert!(soliton_profile(1.0, 1.0, 600.0) >= 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (p, omega) = (1.7, 2.3);
        let h = 1e-5;
        for &x in &[-1.3, -0.2, 0.4, 2.0] {
            let fd =
                (soliton_profile(p, omega, x + h) - soliton_profile(p, omega, x - h)) / (2.0 * h);
            assert!((fd - soliton_derivative(p, omega, x)).abs() < 1e-8);
            let fd2 = (soliton_derivative(p, omega, x + h) - soliton_derivative(p, omega, x - h))
                / (2.0 * h);
            assert!((fd2 - soliton_second_derivative(p, omega, x)).abs() < 1e-7);
        }
    }

    #[test]
    fn attractive_branch_shift_and_kinds() {
        let s = state(3, -1.0, 1.0, 4.0, 1);
        assert!((s.shift - 0.5 * (-0.5f64).atanh()).abs() < 1e-15);
        assert!((s.shift + 0.274653).abs() < 1e-6);
        assert_eq!(
            s.edge_kind,
            vec![EdgeKind::Bump, EdgeKind::Tail, EdgeKind::Tail]
        );
        assert!(s.vertex_flux_residual() < 1e-12);
    }

    #[test]
    fn repulsive_branch_shift_and_kinds() {
        let s = state(3, 1.0, 1.0, 4.0, 0);
        assert!((s.shift - 0.5 * (1.0f64 / 6.0).atanh()).abs() < 1e-15);
        // 0.5 * artanh(1/6) = 0.25 ln(7/5)
        assert!((s.shift - 0.25 * 1.4f64.ln()).abs() < 1e-15);
        assert!((s.shift - 0.084118).abs() < 1e-6);
        assert_eq!(s.count(EdgeKind::Bump), 3);
        assert!(s.vertex_flux_residual() < 1e-12);
    }

    #[test]
    fn bump_and_tail_counts_follow_sign_of_alpha() {
        for n in 2..8 {
            for k in 0..=(n - 1) / 2 {
                for alpha in [-1.5, 0.7] {
                    let thr = alpha * alpha / ((n - 2 * k) as f64).powi(2);
                    let s = state(n, alpha, 1.3, 2.0 * thr, k);
                    assert_eq!(s.shift.signum(), alpha.signum());
                    let (bumps, tails) = if alpha < 0.0 { (k, n - k) } else { (n - k, k) };
                    assert_eq!(s.count(EdgeKind::Bump), bumps);
                    assert_eq!(s.count(EdgeKind::Tail), tails);
                    // continuity at the vertex
                    for j in 0..n {
                        assert!((s.value(j, 0.0) - s.vertex_value()).abs() <= 1e-15 * s.amplitude);
                    }
                    assert!(s.vertex_flux_residual() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bumps_have_interior_maximum() {
        let s = state(5, -2.0, 2.0, 6.0, 2);
        for j in 0..5 {
            let d0 = s.derivative(j, 0.0);
            let far = s.derivative(j, 3.0);
            match s.edge_kind[j] {
                EdgeKind::Bump => assert!(d0 > 0.0 && far < 0.0),
                EdgeKind::Tail => assert!(d0 < 0.0 && far < 0.0),
            }
        }
    }

    #[test]
    fn residual_is_tiny_for_exact_states() {
        for &(p, omega) in &[(1.0, 4.0), (2.0, 1.0), (0.5, 9.0)] {
            let s = state(4, -1.0, p, omega, 1);
            let top = 10.0 / omega.sqrt();
            let grid: Vec<f64> = (1..=100).map(|i| i as f64 * top / 100.0).collect();
            let bound = 1e-10 * omega.powf(1.0 + 0.5 / p);
            assert!(residual_stationary(&s, &grid) < bound);
        }
    }

    #[test]
    fn residual_detects_wrong_amplitude() {
        let s = state(3, -1.0, 1.0, 1.0, 0);
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        let p = s.config.p;
        let omega = s.branch.omega;
        let worst = (0..3)
            .flat_map(|j| grid.iter().map(move |&x| (j, x)))
            .map(|(j, x)| {
                let phi = 1.01 * s.value(j, x);
                let r = -1.01 * s.second_derivative(j, x) + omega * phi
                    - (p + 1.0) * phi.powf(2.0 * p + 1.0);
                r.abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-4);
    }

    #[test]
    fn zero_field_has_zero_mass_and_energy() {
        let z = EdgeSamples {
            length: 5.0,
            edges: vec![vec![Complex64::new(0.0, 0.0); 11]; 3],
        };
        let cfg = GraphConfig {
            n: 3,
            alpha: -1.0,
            p: 1.0,
        };
        assert_eq!(mass(&z).unwrap(), 0.0);
        assert_eq!(energy(&z, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn mass_matches_closed_form_for_cubic() {
        // p = 1, omega = 1: int_0^inf sech^2(x + s) dx = 1 - tanh(s)
        let s = state(3, -1.0, 1.0, 1.0, 0);
        let exact: f64 = s.edge_offsets.iter().map(|&o| 1.0 - o.tanh()).sum();
        let field = complexify(&s.sample(s.default_edge_length(), 40_000));
        assert!((mass(&field).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn energy_converges_second_order() {
        let s = state(3, -1.0, 1.0, 4.0, 1);
        let cfg = s.config;
        let len = 30.0;
        let e = |m: usize| energy(&complexify(&s.sample(len, m)), &cfg).unwrap();
        let (e1, e2, e4) = (e(4000), e(8000), e(16000));
        let ratio = (e1 - e2) / (e2 - e4);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn energy_rejects_vertex_mismatch() {
        let s = state(3, -1.0, 1.0, 1.0, 0);
        let mut f = complexify(&s.sample(10.0, 100));
        f.edges[1][0] *= 1.1;
        assert!(matches!(
            energy(&f, &s.config),
            Err(Error::VertexMismatch(_))
        ));
    }

    #[test]
    fn permutation_preserves_functionals() {
        let s = state(5, -1.0, 1.0, 4.0, 2);
        let perm = [3, 0, 4, 1, 2];
        let t = s.permute_edges(&perm).unwrap();
        for (j, &src) in perm.iter().enumerate() {
            assert_eq!(t.edge_kind[j], s.edge_kind[src]);
        }
        let fs = complexify(&s.sample(20.0, 2000));
        let ft = complexify(&t.sample(20.0, 2000));
        assert!((mass(&fs).unwrap() - mass(&ft).unwrap()).abs() < 1e-12);
        assert!((energy(&fs, &s.config).unwrap() - energy(&ft, &t.config).unwrap()).abs() < 1e-12);
        assert!(s.permute_edges(&[0, 0, 1, 2, 3]).is_err());
    }
}
