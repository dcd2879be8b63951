//! Time evolution of `i psi_t = -Delta psi - (p+1) |psi|^(2p) psi` on the
//! truncated star graph, used to demonstrate (not prove) orbital
//! (in)stability of the standing waves.
//!
//! Space is discretized with the same finite elements as the oracle. A step
//! is Strang splitting: half a step of the exact nonlinear phase rotation, a
//! Crank-Nicolson step of the linear part, and another nonlinear half step.
//! Both substeps preserve the discrete mass `psi^* B psi` exactly.
//!
//! The linear part may carry a frozen potential `V0 = (p+1) Phi^(2p)`, with
//! the nonlinear rotation using `(p+1)|psi|^(2p) - V0` instead. The split is
//! then exact for the standing wave itself (it is an eigenvector of the
//! linear step and the rotation is the identity on it), so the splitting
//! error does not seed the instability being measured.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Mesh;
use crate::oracle::{discrete_stationary, DiscreteOperator, Which};
use crate::params::{validate, BranchParams, GraphConfig};
use crate::star::{StarFactor, StarMatrix, StarVector};
use crate::stationary::build_state;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A complex field on the mesh at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub mesh: Mesh,
    pub values: StarVector<Complex64>,
    pub t: f64,
}

impl Field {
    pub fn from_real(mesh: Mesh, values: &StarVector<f64>) -> Self {
        Self {
            mesh,
            values: values.map(|x| Complex64::new(x, 0.0)),
            t: 0.0,
        }
    }

    /// Discrete mass `psi^* B psi`.
    pub fn mass(&self) -> f64 {
        self.values
            .weighted_dot(&self.mesh.lumped_mass(), &self.values)
            .re
    }

    /// Discrete energy `psi^* K psi - sum_i B_i |psi_i|^(2p+2)`, with `K`
    /// including the vertex term.
    pub fn energy(&self, config: &GraphConfig) -> f64 {
        let k = self
            .mesh
            .stiffness(config.alpha)
            .map(|x| Complex64::new(x, 0.0));
        let kinetic = self
            .values
            .weighted_dot(&unit_weights(&self.mesh), &k.mul_vec(&self.values))
            .re;
        let b = self.mesh.lumped_mass();
        let potential: f64 = self
            .values
            .iter()
            .zip(b.iter())
            .map(|(z, w)| w * z.norm_sqr().powf(config.p + 1.0))
            .sum();
        kinetic - potential
    }

    /// Largest modulus on the last interior node of any edge, relative to the
    /// largest modulus overall.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.values.max_modulus();
        let edge = self
            .values
            .edges
            .iter()
            .filter_map(|e| e.last())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        edge / peak
    }
}

fn unit_weights(mesh: &Mesh) -> StarVector<f64> {
    let mut w = mesh.zeros::<f64>();
    for x in w.iter_mut() {
        *x = 1.0;
    }
    w
}

/// Discrete `H1` norm squared `u^* (K_0 + B) u` (no vertex term).
pub fn h1_norm_sq(mesh: &Mesh, u: &StarVector<Complex64>) -> f64 {
    let k = mesh.stiffness(0.0).map(|x| Complex64::new(x, 0.0));
    let ku = k.mul_vec(u);
    u.weighted_dot(&unit_weights(mesh), &ku).re + u.weighted_dot(&mesh.lumped_mass(), u).re
}

/// Reusable factorization for steps of a fixed size.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub mesh: Mesh,
    pub config: GraphConfig,
    pub dt: f64,
    explicit: StarMatrix<Complex64>,
    implicit: StarFactor<Complex64>,
    implicit_matrix: StarMatrix<Complex64>,
    /// Frozen potential moved into the linear step, if any.
    frozen: Option<StarVector<f64>>,
}

impl Propagator {
    /// Potential-free linear step. `dt` may be negative (backward stepping).
    pub fn new(mesh: Mesh, config: &GraphConfig, dt: f64) -> Result<Self> {
        Self::build(mesh, config, dt, None)
    }

    /// Linear step with the frozen potential `(p+1) |wave|^(2p)`.
    pub fn around_wave(
        mesh: Mesh,
        config: &GraphConfig,
        dt: f64,
        wave: &StarVector<f64>,
    ) -> Result<Self> {
        let v0 = wave.map(|x| (config.p + 1.0) * x.abs().powf(2.0 * config.p));
        Self::build(mesh, config, dt, Some(v0))
    }

    fn build(
        mesh: Mesh,
        config: &GraphConfig,
        dt: f64,
        frozen: Option<StarVector<f64>>,
    ) -> Result<Self> {
        if !(dt != 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step must be nonzero, got {dt}"
            )));
        }
        let b = mesh.lumped_mass();
        let mut k = mesh.stiffness(config.alpha);
        if let Some(v0) = &frozen {
            k = k.add_diagonal(-1.0, &v0.zip_map(&b, |v, w| v * w));
        }
        let k = k.map(|x| Complex64::new(x, 0.0));
        let half = 0.5 * dt * I;
        let scaled_k = k.map(|x| half * x);
        let mass = k
            .map(|_| Complex64::new(0.0, 0.0))
            .add_diagonal(Complex64::new(1.0, 0.0), &b);
        let implicit_matrix = add(&mass, &scaled_k, 1.0);
        let explicit = add(&mass, &scaled_k, -1.0);
        let implicit = implicit_matrix.factor(1e-14)?;
        Ok(Self {
            mesh,
            config: *config,
            dt,
            explicit,
            implicit,
            implicit_matrix,
            frozen,
        })
    }

    fn nonlinear(&self, psi: &mut StarVector<Complex64>, tau: f64) {
        let c = (self.config.p + 1.0) * tau;
        let p = self.config.p;
        let pow = |x: f64| if p == 1.0 { x } else { x.powf(p) };
        match &self.frozen {
            None => {
                for z in psi.iter_mut() {
                    *z *= Complex64::from_polar(1.0, c * pow(z.norm_sqr()));
                }
            }
            Some(v0) => {
                for (z, v) in psi.iter_mut().zip(v0.iter()) {
                    *z *= Complex64::from_polar(1.0, c * pow(z.norm_sqr()) - tau * v);
                }
            }
        }
    }

    /// One Strang step; fails if the linear solve residual exceeds `1e-12`
    /// relative.
    pub fn step(&self, field: &mut Field) -> Result<()> {
        let mut work = Workspace::new(&field.mesh);
        self.step_with(field, &mut work)
    }

    /// [`Propagator::step`] with caller-owned scratch space.
    pub fn step_with(&self, field: &mut Field, work: &mut Workspace) -> Result<()> {
        let psi = &mut field.values;
        self.nonlinear(psi, 0.5 * self.dt);
        self.explicit.mul_vec_into(psi, &mut work.rhs);
        psi.clone_from(&work.rhs);
        self.implicit.solve_in_place(psi);
        self.implicit_matrix.mul_vec_into(psi, &mut work.check);
        let mut worst: f64 = 0.0;
        for (a, b) in work.check.iter().zip(work.rhs.iter()) {
            worst = worst.max((a - b).norm_sqr());
        }
        let scale = work.rhs.max_modulus().max(f64::MIN_POSITIVE);
        let worst = worst.sqrt();
        if worst > 1e-12 * scale {
            return Err(Error::SolverFailure(format!(
                "Crank-Nicolson residual {:e}",
                worst / scale
            )));
        }
        self.nonlinear(psi, 0.5 * self.dt);
        field.t += self.dt;
        Ok(())
    }
}

/// Scratch vectors for [`Propagator::step_with`].
#[derive(Debug, Clone)]
pub struct Workspace {
    rhs: StarVector<Complex64>,
    check: StarVector<Complex64>,
}

impl Workspace {
    pub fn new(mesh: &Mesh) -> Self {
        Self {
            rhs: mesh.zeros(),
            check: mesh.zeros(),
        }
    }
}

fn add(a: &StarMatrix<Complex64>, b: &StarMatrix<Complex64>, c: f64) -> StarMatrix<Complex64> {
    let c = Complex64::new(c, 0.0);
    let zip = |x: &Vec<Vec<Complex64>>, y: &Vec<Vec<Complex64>>| -> Vec<Vec<Complex64>> {
        x.iter()
            .zip(y)
            .map(|(u, v)| u.iter().zip(v).map(|(&s, &t)| s + c * t).collect())
            .collect()
    };
    StarMatrix {
        vertex: a.vertex + c * b.vertex,
        coupling: a
            .coupling
            .iter()
            .zip(&b.coupling)
            .map(|(&s, &t)| s + c * t)
            .collect(),
        diag: zip(&a.diag, &b.diag),
        off: zip(&a.off, &b.off),
    }
}

/// One step of size `dt` (builds a fresh [`Propagator`]).
pub fn step(field: &Field, config: &GraphConfig, dt: f64) -> Result<Field> {
    let mut out = field.clone();
    Propagator::new(field.mesh, config, dt)?.step(&mut out)?;
    Ok(out)
}

/// Distance from `field` to the orbit `{e^{i theta} reference}`: `theta` is
/// the argument of the mass inner product `<reference, field>` (the exact
/// `L2` minimizer) and the distance is the discrete `H1` norm of
/// `field - e^{i theta} reference`.
pub fn orbital_distance(field: &Field, reference: &StarVector<f64>) -> (f64, f64) {
    let b = field.mesh.lumped_mass();
    let r = reference.map(|x| Complex64::new(x, 0.0));
    let theta = r.weighted_dot(&b, &field.values).arg();
    let rot = Complex64::from_polar(1.0, theta);
    let diff = field.values.zip_map(&r, |z, w| z - rot * w);
    (h1_norm_sq(&field.mesh, &diff).max(0.0).sqrt(), theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `d Phi / d omega`, the generalized kernel direction.
    KernelAdjacent,
    /// Seeded smooth random profile.
    Random,
    /// Sum of the `L+` eigenvectors with negative eigenvalue.
    UnstableMode,
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel_adjacent" => Ok(Direction::KernelAdjacent),
            "random" => Ok(Direction::Random),
            "unstable_mode" => Ok(Direction::UnstableMode),
            other => Err(Error::InvalidArgument(format!("unknown direction {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub eps: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Edge length; `None` selects `|a_K| + 40/(p sqrt(omega))`.
    pub edge_length: Option<f64>,
    pub intervals: usize,
    pub direction: Direction,
    pub seed: u64,
    /// Steps between trace samples.
    pub record_every: usize,
    /// Stop when the field on the last interior node exceeds this fraction of
    /// its peak. `None` disables the guard.
    pub boundary_guard: Option<f64>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            t_final: 20.0,
            dt: 1e-3,
            edge_length: None,
            intervals: 4000,
            direction: Direction::UnstableMode,
            seed: 0,
            record_every: 50,
            boundary_guard: Some(1e-6),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    BoundaryReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub orbital_distance: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub stop: StopReason,
    pub settings: ExperimentSettings,
}

impl EvolutionTrace {
    fn new(settings: ExperimentSettings) -> Self {
        Self {
            times: Vec::new(),
            mass: Vec::new(),
            energy: Vec::new(),
            orbital_distance: Vec::new(),
            theta_star: Vec::new(),
            stop: StopReason::Completed,
            settings,
        }
    }

    fn record(&mut self, field: &Field, config: &GraphConfig, reference: &StarVector<f64>) {
        let (d, theta) = orbital_distance(field, reference);
        self.times.push(field.t);
        self.mass.push(field.mass());
        self.energy.push(field.energy(config));
        self.orbital_distance.push(d);
        self.theta_star.push(theta);
    }

    /// `max_t distance(t) / distance(0)`.
    pub fn growth_factor(&self) -> f64 {
        let d0 = self.orbital_distance[0];
        self.orbital_distance.iter().copied().fold(0.0, f64::max) / d0
    }

    /// First recorded time at which the distance reaches `factor` times its
    /// initial value.
    pub fn time_to_growth(&self, factor: f64) -> Option<f64> {
        let d0 = self.orbital_distance[0];
        self.orbital_distance
            .iter()
            .position(|&d| d >= factor * d0)
            .map(|i| self.times[i])
    }

    pub fn max_relative_mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass
            .iter()
            .map(|m| (m - m0).abs() / m0)
            .fold(0.0, f64::max)
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy
            .iter()
            .map(|e| (e - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    }
}

/// Discrete standing wave and its mesh for an experiment.
pub fn discrete_wave(
    config: &GraphConfig,
    branch: &BranchParams,
    mesh: &Mesh,
) -> Result<StarVector<f64>> {
    let state = build_state(config, branch)?;
    let exact = mesh.sample(|j, x| state.value(j, x));
    discrete_stationary(mesh, config, branch.omega, &exact)
}

/// A perturbation direction with unit `H1` norm, mass-orthogonal to the
/// gauge direction `i Phi`.
pub fn perturbation(
    config: &GraphConfig,
    branch: &BranchParams,
    mesh: &Mesh,
    wave: &StarVector<f64>,
    direction: Direction,
    seed: u64,
) -> Result<StarVector<Complex64>> {
    let raw: StarVector<Complex64> = match direction {
        Direction::UnstableMode => {
            let op = DiscreteOperator::assemble(
                config,
                branch,
                Which::Plus,
                mesh.length,
                mesh.intervals,
            )?;
            let zero = 1e-9 * branch.omega;
            let pairs = op.eigenpairs_below(-zero, 64)?;
            if pairs.is_empty() {
                return Err(Error::InvalidArgument(
                    "L+ has no negative eigenvalue".into(),
                ));
            }
            let mut sum = mesh.zeros::<f64>();
            for (_, v) in &pairs {
                sum.axpy(1.0, v);
            }
            sum.map(|x| Complex64::new(x, 0.0))
        }
        Direction::KernelAdjacent => {
            let d = 1e-4 * branch.omega;
            let up = discrete_wave(config, &BranchParams::new(branch.omega + d, branch.k), mesh)?;
            let down = discrete_wave(config, &BranchParams::new(branch.omega - d, branch.k), mesh)?;
            up.zip_map(&down, |a, b| (a - b) / (2.0 * d))
                .map(|x| Complex64::new(x, 0.0))
        }
        Direction::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kappa = config.p * branch.omega.sqrt();
            let mut coeff = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let shared = coeff();
            let per_edge: Vec<[Complex64; 3]> = (0..mesh.edges)
                .map(|_| [coeff(), coeff(), coeff()])
                .collect();
            let profile = |j: usize, x: f64| {
                let y = kappa * x;
                let c = &per_edge[j];
                (shared + c[0] * y + c[1] * y * y + c[2] * y * y * y) * (-y).exp()
            };
            StarVector {
                vertex: shared,
                edges: (0..mesh.edges)
                    .map(|j| {
                        (0..mesh.interior())
                            .map(|i| profile(j, mesh.node(i)))
                            .collect()
                    })
                    .collect(),
            }
        }
    };
    let b = mesh.lumped_mass();
    let gauge = wave.map(|x| Complex64::new(0.0, x));
    let along = raw.weighted_dot(&b, &gauge).re / gauge.weighted_dot(&b, &gauge).re;
    let mut d = raw;
    // real part of <gauge, d> is removed; gauge is purely imaginary
    d.axpy(Complex64::new(-along, 0.0), &gauge);
    let norm = h1_norm_sq(mesh, &d).sqrt();
    if !(norm > 0.0) {
        return Err(Error::SolverFailure(
            "perturbation direction vanished".into(),
        ));
    }
    d.scale(Complex64::new(1.0 / norm, 0.0));
    Ok(d)
}

/// Evolves `Phi + eps * direction` and records the trace.
pub fn instability_experiment(
    config: &GraphConfig,
    branch: &BranchParams,
    settings: &ExperimentSettings,
) -> Result<EvolutionTrace> {
    validate(config, branch)?;
    if !(settings.eps > 0.0 && settings.eps <= 1e-2) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1e-2], got {}",
            settings.eps
        )));
    }
    if !(settings.t_final > 0.0) || settings.record_every == 0 {
        return Err(Error::InvalidArgument(
            "t_final must be positive and record_every nonzero".into(),
        ));
    }
    let state = build_state(config, branch)?;
    let length = settings
        .edge_length
        .unwrap_or_else(|| state.default_edge_length());
    let mesh = Mesh::new(config.n, length, settings.intervals)?;
    let wave = discrete_wave(config, branch, &mesh)?;
    let dir = perturbation(
        config,
        branch,
        &mesh,
        &wave,
        settings.direction,
        settings.seed,
    )?;
    let mut field = Field::from_real(mesh, &wave);
    field.values.axpy(Complex64::new(settings.eps, 0.0), &dir);
    evolve(config, field, &wave, settings)
}

/// Evolves an arbitrary initial field against a reference wave, splitting
/// around that wave.
pub fn evolve(
    config: &GraphConfig,
    mut field: Field,
    reference: &StarVector<f64>,
    settings: &ExperimentSettings,
) -> Result<EvolutionTrace> {
    let prop = Propagator::around_wave(field.mesh, config, settings.dt, reference)?;
    let steps = (settings.t_final / settings.dt).round() as usize;
    let mut trace = EvolutionTrace::new(*settings);
    let mut work = Workspace::new(&field.mesh);
    trace.record(&field, config, reference);
    for n in 1..=steps {
        prop.step_with(&mut field, &mut work)?;
        if n % settings.record_every == 0 || n == steps {
            trace.record(&field, config, reference);
            if let Some(guard) = settings.boundary_guard {
                if field.boundary_ratio() > guard {
                    trace.stop = StopReason::BoundaryReached;
                    break;
                }
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(
        n: usize,
        alpha: f64,
        omega: f64,
        k: usize,
        intervals: usize,
    ) -> (GraphConfig, BranchParams, Mesh, StarVector<f64>) {
        let c = GraphConfig { n, alpha, p: 1.0 };
        let b = BranchParams::new(omega, k);
        let state = build_state(&c, &b).unwrap();
        let mesh = Mesh::new(n, state.default_edge_length(), intervals).unwrap();
        let wave = discrete_wave(&c, &b, &mesh).unwrap();
        (c, b, mesh, wave)
    }

    #[test]
    fn phase_rotated_wave_is_on_the_orbit() {
        let (_, _, mesh, wave) = setup(3, -1.0, 4.0, 1, 400);
        let mut f = Field::from_real(mesh, &wave);
        f.values.scale(Complex64::from_polar(1.0, 0.7));
        let (d, theta) = orbital_distance(&f, &wave);
        assert!(d < 1e-12);
        assert!((theta - 0.7).abs() < 1e-12);
    }

    #[test]
    fn theta_is_equivariant_and_distance_linear() {
        let (c, b, mesh, wave) = setup(3, -1.0, 4.0, 1, 400);
        let dir = perturbation(&c, &b, &mesh, &wave, Direction::Random, 3).unwrap();
        let mut f = Field::from_real(mesh, &wave);
        f.values.axpy(Complex64::new(1e-3, 0.0), &dir);
        let (d1, t1) = orbital_distance(&f, &wave);
        assert!(d1 > 0.5e-3 && d1 < 1.01e-3, "{d1}");
        let mut g = f.clone();
        g.values.scale(Complex64::from_polar(1.0, 0.3));
        let (d2, t2) = orbital_distance(&g, &wave);
        assert!((t2 - t1 - 0.3).abs() < 1e-12 && (d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn perturbations_are_transverse_and_normalized() {
        let (c, b, mesh, wave) = setup(3, -1.0, 4.0, 1, 400);
        let bm = mesh.lumped_mass();
        let gauge = wave.map(|x| Complex64::new(0.0, x));
        for dir in [
            Direction::Random,
            Direction::UnstableMode,
            Direction::KernelAdjacent,
        ] {
            let d = perturbation(&c, &b, &mesh, &wave, dir, 1).unwrap();
            assert!((h1_norm_sq(&mesh, &d) - 1.0).abs() < 1e-12);
            assert!(gauge.weighted_dot(&bm, &d).re.abs() < 1e-12);
        }
    }

    #[test]
    fn random_direction_is_seeded() {
        let (c, b, mesh, wave) = setup(3, -1.0, 1.0, 0, 200);
        let a = perturbation(&c, &b, &mesh, &wave, Direction::Random, 9).unwrap();
        let a2 = perturbation(&c, &b, &mesh, &wave, Direction::Random, 9).unwrap();
        let other = perturbation(&c, &b, &mesh, &wave, Direction::Random, 10).unwrap();
        assert_eq!(a, a2);
        assert_ne!(a, other);
    }

    #[test]
    fn mass_is_conserved_and_steps_reverse() {
        let (c, b, mesh, wave) = setup(3, -1.0, 4.0, 1, 800);
        let dir = perturbation(&c, &b, &mesh, &wave, Direction::Random, 5).unwrap();
        let mut f = Field::from_real(mesh, &wave);
        f.values.axpy(Complex64::new(1e-2, 0.0), &dir);
        let start = f.clone();
        let fwd = Propagator::around_wave(mesh, &c, 1e-3, &wave).unwrap();
        let back = Propagator::around_wave(mesh, &c, -1e-3, &wave).unwrap();
        for _ in 0..200 {
            fwd.step(&mut f).unwrap();
        }
        assert!((f.mass() - start.mass()).abs() < 1e-12 * start.mass());
        for _ in 0..200 {
            back.step(&mut f).unwrap();
        }
        let err = f.values.zip_map(&start.values, |a, b| a - b).max_modulus();
        assert!(err < 1e-8 * start.values.max_modulus(), "{err}");
    }

    #[test]
    fn gauge_equivariance() {
        let (c, b, mesh, wave) = setup(3, 1.0, 4.0, 0, 400);
        let dir = perturbation(&c, &b, &mesh, &wave, Direction::Random, 2).unwrap();
        let mut f = Field::from_real(mesh, &wave);
        f.values.axpy(Complex64::new(1e-2, 0.0), &dir);
        let rot = Complex64::from_polar(1.0, 1.1);
        let mut g = f.clone();
        g.values.scale(rot);
        let prop = Propagator::new(mesh, &c, 2e-3).unwrap();
        for _ in 0..50 {
            prop.step(&mut f).unwrap();
            prop.step(&mut g).unwrap();
        }
        let err = f
            .values
            .zip_map(&g.values, |a, b| rot * a - b)
            .max_modulus();
        assert!(err < 1e-12 * f.values.max_modulus(), "{err}");
    }

    #[test]
    fn both_splittings_agree_to_second_order() {
        let (c, b, mesh, wave) = setup(3, -1.0, 1.0, 0, 400);
        let dir = perturbation(&c, &b, &mesh, &wave, Direction::Random, 4).unwrap();
        let mut f0 = Field::from_real(mesh, &wave);
        f0.values.axpy(Complex64::new(1e-2, 0.0), &dir);
        let run = |dt: f64, frozen: bool| {
            let prop = if frozen {
                Propagator::around_wave(mesh, &c, dt, &wave).unwrap()
            } else {
                Propagator::new(mesh, &c, dt).unwrap()
            };
            let mut f = f0.clone();
            for _ in 0..(0.2 / dt).round() as usize {
                prop.step(&mut f).unwrap();
            }
            f
        };
        let reference = run(2.5e-5, true);
        let diff = |f: &Field| {
            f.values
                .zip_map(&reference.values, |a, b| a - b)
                .max_modulus()
        };
        let (e1, e2) = (diff(&run(2e-3, false)), diff(&run(1e-3, false)));
        assert!((e1 / e2 - 4.0).abs() < 0.5, "{}", e1 / e2);
        assert!(diff(&run(1e-3, true)) < 2.0 * e2);
    }

    #[test]
    fn standing_wave_rotates_in_place() {
        let (c, b, mesh, wave) = setup(3, -1.0, 4.0, 1, 1000);
        let settings = ExperimentSettings {
            t_final: 1.0,
            dt: 1e-3,
            record_every: 100,
            ..Default::default()
        };
        let trace = evolve(&c, Field::from_real(mesh, &wave), &wave, &settings).unwrap();
        assert!(
            trace.orbital_distance.iter().all(|&d| d < 1e-6),
            "{:?}",
            trace.orbital_distance
        );
        // the phase advances at rate omega
        let theta = trace.theta_star.last().unwrap();
        let expect = (b.omega * 1.0 + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        assert!((theta - expect).abs() < 1e-5, "{theta} {expect}");
    }

    #[test]
    fn rejects_bad_eps() {
        let c = GraphConfig {
            n: 3,
            alpha: -1.0,
            p: 1.0,
        };
        let b = BranchParams::new(4.0, 1);
        let s = ExperimentSettings {
            eps: 0.5,
            ..Default::default()
        };
        assert!(instability_experiment(&c, &b, &s).is_err());
    }
}
