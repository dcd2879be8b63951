//! Exact Morse and degeneracy indices of `L+` and `L-` from the scalar
//! shooting solution.
//!
//! On edge `j` an eigenfunction of `L+` must be `c_j v(x ± a_K; lambda)`, so the
//! vertex conditions reduce to a linear system whose determinant factors as
//!
//! ```text
//! det M = v(a)^(K-1) v(-a)^(N-K-1) [K v'(a) v(-a) + (N-K) v(a) v'(-a) - alpha v(a) v(-a)].
//! ```
//!
//! The first two factors give eigenvalues of multiplicity `K-1` and `N-K-1`
//! where `v` vanishes at a shift point; the bracket gives simple eigenvalues,
//! which are the roots of `F(lambda) = alpha` with
//! `F = K v'(a)/v(a) + (N-K) v'(-a)/v(-a)`. `F` is increasing on each interval
//! of continuity and has a single pole where `v(-|a|) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{validate, BranchParams, GraphConfig, ToleranceSet};
use crate::roots::illinois;
use crate::shooting::Shooter;
use crate::stationary::edge_shift;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    /// `v(a_K) = 0`, multiplicity `K-1` (attractive vertex).
    CaseABumpZero,
    /// `v(-a_K) = 0`, multiplicity `N-K-1` (repulsive vertex).
    CaseBTailZero,
    /// Root of `F(lambda) = alpha`, simple.
    CaseCScalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub lambda: f64,
    pub multiplicity: usize,
    pub kind: EigenKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// At least two negative directions of `L+`: spectrally and orbitally unstable.
    Unstable,
    /// `n(L+) = 1`: stability follows from the slope condition, not decided here.
    StableCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub config: GraphConfig,
    pub branch: BranchParams,
    pub eigenvalues: Vec<EigenvalueRecord>,
    #[serde(rename = "n_Lplus")]
    pub n_lplus: usize,
    #[serde(rename = "z_Lplus")]
    pub z_lplus: usize,
    #[serde(rename = "n_Lminus")]
    pub n_lminus: usize,
    #[serde(rename = "z_Lminus")]
    pub z_lminus: usize,
    pub verdict: Verdict,
    /// Even ground state of the whole-line comparison operator.
    pub lambda0: f64,
    /// Pole of `F` (`lambda_*` or `lambda_**`), when `F` has one.
    pub pole: Option<f64>,
    pub warnings: Vec<String>,
}

impl SpectralReport {
    /// All eigenvalues with multiplicity, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .flat_map(|r| std::iter::repeat(r.lambda).take(r.multiplicity))
            .collect()
    }

    pub fn simple_roots(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .filter(|r| r.kind == EigenKind::CaseCScalar)
            .map(|r| r.lambda)
            .collect()
    }
}

/// Value of `F(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FValue {
    Finite(f64),
    /// `v(-|a_K|)` vanishes to working precision.
    Pole,
}

impl FValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            FValue::Finite(v) => Some(v),
            FValue::Pole => None,
        }
    }
}

/// The three factors of the determinant condition at some `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetFactors {
    /// `v(a_K)`; `1` when `K = 0` (the factor is absent).
    pub shift_value: f64,
    /// `v(-a_K)`.
    pub opposite_value: f64,
    /// `K v'(a) v(-a) + (N-K) v(a) v'(-a) - alpha v(a) v(-a)`, or
    /// `N v'(-a) - alpha v(-a)` when `K = 0`.
    pub case_c: f64,
}

/// Closed form of `F(0)`: `p (alpha^2 - (N-2K)^2 omega) / alpha + alpha`.
pub fn f_at_zero_closed_form(config: &GraphConfig, branch: &BranchParams) -> f64 {
    let m = config.n as f64 - 2.0 * branch.k as f64;
    let a = config.alpha;
    config.p * (a * a - m * m * branch.omega) / a + a
}

/// A validated problem with a shooting engine attached.
#[derive(Debug)]
pub struct SpectralProblem {
    config: GraphConfig,
    branch: BranchParams,
    tol: ToleranceSet,
    shift: f64,
    shooter: Shooter,
}

impl SpectralProblem {
    pub fn new(config: &GraphConfig, branch: &BranchParams, tol: ToleranceSet) -> Result<Self> {
        validate(config, branch)?;
        let shift = edge_shift(config, branch);
        let kappa = config.p * branch.omega.sqrt();
        let shooter =
            Shooter::with_floor(config.p, branch.omega, tol, -(shift.abs() * kappa) - 1.0)?;
        Ok(Self {
            config: *config,
            branch: *branch,
            tol,
            shift,
            shooter,
        })
    }

    pub fn config(&self) -> &GraphConfig {
        &self.config
    }

    pub fn branch(&self) -> &BranchParams {
        &self.branch
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn shooter(&self) -> &Shooter {
        &self.shooter
    }

    /// Whether `F` has a pole on `(-inf, 0]`: always for a repulsive vertex,
    /// and for an attractive one as soon as some edge carries a bump.
    pub fn has_pole(&self) -> bool {
        self.config.alpha > 0.0 || self.branch.k >= 1
    }

    fn k_n(&self) -> (f64, f64) {
        let k = self.branch.k as f64;
        (k, self.config.n as f64 - k)
    }

    /// `F(lambda)`.
    pub fn f(&self, lambda: f64) -> Result<FValue> {
        if lambda > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "F is defined for lambda <= 0, got {lambda}"
            )));
        }
        let a = self.shift;
        let mu = (self.branch.omega - lambda).sqrt();
        let (k, rest) = self.k_n();
        let vals = self.shooter.sample(lambda, &[a, -a])?;
        let mut total = 0.0;
        for (weight, (w, dw)) in [(k, vals[0]), (rest, vals[1])] {
            if weight == 0.0 {
                continue;
            }
            if w.abs() <= f64::EPSILON * (dw.abs() / mu) {
                return Ok(FValue::Pole);
            }
            total += weight * (-mu + dw / w);
        }
        Ok(FValue::Finite(total))
    }

    /// `F(lambda) - alpha` with the sign conventions of the pole.
    fn f_minus_alpha(&self, lambda: f64) -> Result<f64> {
        match self.f(lambda)? {
            FValue::Finite(v) => Ok(v - self.config.alpha),
            FValue::Pole => Ok(f64::NAN),
        }
    }

    /// `w(-|a_K|; lambda)`, which has the sign of `v(-|a_K|; lambda)`.
    fn w_at_far_shift(&self, lambda: f64) -> Result<f64> {
        Ok(self.shooter.sample(lambda, &[-self.shift.abs()])?[0].0)
    }

    /// The unique `lambda_* in (lambda0, 0)` with `v(-|a_K|; lambda_*) = 0`.
    pub fn lambda_star(&self) -> Result<f64> {
        let lo = self.shooter.lambda0()?;
        let hi = 0.0;
        let (f_lo, f_hi) = (self.w_at_far_shift(lo)?, self.w_at_far_shift(hi)?);
        if !(f_lo > 0.0 && f_hi < 0.0) {
            return Err(Error::BracketFailure {
                what: "lambda_star",
                lo,
                hi,
            });
        }
        illinois(
            lo,
            f_lo,
            hi,
            f_hi,
            self.tol.root_tol,
            0.0,
            "lambda_star",
            |l| self.w_at_far_shift(l),
        )
    }

    /// The bracketed determinant condition with the exponential factors
    /// removed. Continuous through the pole of `F`, and away from it
    /// `sign(F - alpha) = sign(scalar_condition * v(a) v(-a))`.
    fn scalar_condition(&self, lambda: f64) -> Result<f64> {
        let a = self.shift;
        let mu = (self.branch.omega - lambda).sqrt();
        let vals = self.shooter.sample(lambda, &[a, -a])?;
        let ((wa, dwa), (wb, dwb)) = (vals[0], vals[1]);
        let (k, rest) = self.k_n();
        let alpha = self.config.alpha;
        if self.branch.k == 0 {
            return Ok(rest * (dwb - mu * wb) - alpha * wb);
        }
        Ok(k * (dwa - mu * wa) * wb + rest * wa * (dwb - mu * wb) - alpha * wa * wb)
    }

    /// All roots of `F(lambda) = alpha` on `(-inf, 0]`, ascending.
    pub fn roots(&self) -> Result<Vec<f64>> {
        let pole = if self.has_pole() {
            Some(self.lambda_star()?)
        } else {
            None
        };
        self.roots_with_pole(pole)
    }

    fn roots_with_pole(&self, pole: Option<f64>) -> Result<Vec<f64>> {
        let rel = self.tol.root_tol;
        let at_zero = self.f_minus_alpha(0.0)?;
        let mut roots = Vec::with_capacity(2);

        // Leftmost root: F runs from -inf up to +inf at the pole, or up to
        // F(0) > alpha without one. v(a) v(-a) > 0 on this interval, so the
        // scalar condition has the sign of F - alpha.
        let hi = match pole {
            Some(l) => l,
            None => {
                if !(at_zero > 0.0) {
                    return Err(Error::BracketFailure {
                        what: "F = alpha",
                        lo: f64::NEG_INFINITY,
                        hi: 0.0,
                    });
                }
                0.0
            }
        };
        let f_hi = self.scalar_condition(hi)?;
        let mut width = hi.abs().max(self.branch.omega);
        let mut lo = hi - width;
        let mut f_lo = self.scalar_condition(lo)?;
        while !(f_lo < 0.0) {
            width *= 2.0;
            lo = hi - width;
            if width > 1e12 * self.branch.omega {
                return Err(Error::BracketFailure {
                    what: "F = alpha",
                    lo,
                    hi,
                });
            }
            f_lo = self.scalar_condition(lo)?;
        }
        roots.push(illinois(lo, f_lo, hi, f_hi, rel, 0.0, "lambda_1", |l| {
            self.scalar_condition(l)
        })?);

        // attractive vertex with bumps: second root between the pole and 0
        if let Some(pole) = pole {
            if self.config.alpha < 0.0 {
                if !(at_zero > 0.0) {
                    return Err(Error::BracketFailure {
                        what: "lambda_2",
                        lo: pole,
                        hi: 0.0,
                    });
                }
                let f0 = self.scalar_condition(0.0)?;
                roots.push(illinois(pole, f_hi, 0.0, f0, rel, 0.0, "lambda_2", |l| {
                    self.scalar_condition(l)
                })?);
            } else if at_zero > 0.0 {
                return Err(Error::InvalidArgument(
                    "F(0) > alpha at a repulsive vertex; shooting solution inaccurate".into(),
                ));
            }
        }
        Ok(roots)
    }

    /// The determinant factors at `lambda`.
    pub fn det_factors(&self, lambda: f64) -> Result<DetFactors> {
        let a = self.shift;
        let mu = (self.branch.omega - lambda).sqrt();
        let vals = self.shooter.sample(lambda, &[a, -a])?;
        let ((wa, dwa), (wb, dwb)) = (vals[0], vals[1]);
        let (k, rest) = self.k_n();
        let alpha = self.config.alpha;
        let opposite_value = wb * (mu * a).exp();
        if self.branch.k == 0 {
            let case_c = (mu * a).exp() * (rest * (dwb - mu * wb) - alpha * wb);
            return Ok(DetFactors {
                shift_value: 1.0,
                opposite_value,
                case_c,
            });
        }
        // the exponentials e^{-mu a} e^{mu a} cancel in every product
        let case_c = k * (dwa - mu * wa) * wb + rest * wa * (dwb - mu * wb) - alpha * wa * wb;
        Ok(DetFactors {
            shift_value: wa * (-mu * a).exp(),
            opposite_value,
            case_c,
        })
    }

    /// `v(|a_K|; lambda) > 0`, the condition ruling out the other zero case.
    fn near_shift_positive(&self, lambda: f64) -> Result<bool> {
        Ok(self.shooter.sample(lambda, &[self.shift.abs()])?[0].0 > 0.0)
    }

    /// Full eigenvalue inventory of `L+` on `(-inf, 0]` and the index counts.
    pub fn report(&self) -> Result<SpectralReport> {
        let lambda0 = self.shooter.lambda0()?;
        let pole = if self.has_pole() {
            Some(self.lambda_star()?)
        } else {
            None
        };
        let roots = self.roots_with_pole(pole)?;
        let (n, k) = (self.config.n, self.branch.k);
        let mut eigenvalues: Vec<EigenvalueRecord> = roots
            .iter()
            .map(|&lambda| EigenvalueRecord {
                lambda,
                multiplicity: 1,
                kind: EigenKind::CaseCScalar,
            })
            .collect();
        let mut warnings = Vec::new();
        if let Some(ls) = pole {
            let (multiplicity, kind) = if self.config.alpha < 0.0 {
                (k - 1, EigenKind::CaseABumpZero)
            } else {
                (n - k - 1, EigenKind::CaseBTailZero)
            };
            if multiplicity > 0 {
                eigenvalues.push(EigenvalueRecord {
                    lambda: ls,
                    multiplicity,
                    kind,
                });
            }
            for &r in &roots {
                if (r - ls).abs() < 10.0 * self.tol.root_tol * ls.abs() {
                    warnings.push(format!(
                        "simple eigenvalue {r} is within 10 root_tol of the pole {ls}"
                    ));
                }
            }
        }
        // spot check that v never vanishes at the near shift point
        let mut probes = vec![0.0, lambda0];
        probes.extend(&roots);
        probes.extend(pole);
        for l in probes {
            if !self.near_shift_positive(l)? {
                warnings.push(format!("v(|a_K|) <= 0 at lambda = {l}"));
            }
        }
        eigenvalues.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

        let zero = self.tol.zero_threshold(self.branch.omega);
        let n_lplus = eigenvalues
            .iter()
            .filter(|r| r.lambda < -zero)
            .map(|r| r.multiplicity)
            .sum();
        let z_lplus = eigenvalues
            .iter()
            .filter(|r| r.lambda.abs() <= zero)
            .map(|r| r.multiplicity)
            .sum();
        let verdict = if n_lplus >= 2 {
            Verdict::Unstable
        } else {
            Verdict::StableCandidate
        };
        Ok(SpectralReport {
            config: self.config,
            branch: self.branch,
            eigenvalues,
            n_lplus,
            z_lplus,
            // L- Phi = 0 is the stationary equation itself and L- >= 0 by the
            // positivity of Phi; the oracle checks both numerically.
            n_lminus: 0,
            z_lminus: 1,
            verdict,
            lambda0,
            pole,
            warnings,
        })
    }
}

/// `F(lambda)` for a single configuration.
#[allow(non_snake_case)]
pub fn F(
    config: &GraphConfig,
    branch: &BranchParams,
    lambda: f64,
    tol: ToleranceSet,
) -> Result<FValue> {
    SpectralProblem::new(config, branch, tol)?.f(lambda)
}

pub fn find_lambda_star(
    config: &GraphConfig,
    branch: &BranchParams,
    tol: ToleranceSet,
) -> Result<f64> {
    SpectralProblem::new(config, branch, tol)?.lambda_star()
}

#[allow(non_snake_case)]
pub fn solve_F_equals_alpha(
    config: &GraphConfig,
    branch: &BranchParams,
    tol: ToleranceSet,
) -> Result<Vec<f64>> {
    SpectralProblem::new(config, branch, tol)?.roots()
}

#[allow(non_snake_case)]
pub fn det_M_condition(
    config: &GraphConfig,
    branch: &BranchParams,
    lambda: f64,
    tol: ToleranceSet,
) -> Result<DetFactors> {
    SpectralProblem::new(config, branch, tol)?.det_factors(lambda)
}

pub fn assemble_report(
    config: &GraphConfig,
    branch: &BranchParams,
    tol: ToleranceSet,
) -> Result<SpectralReport> {
    SpectralProblem::new(config, branch, tol)?.report()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(n: usize, alpha: f64, p: f64, omega: f64, k: usize) -> SpectralProblem {
        SpectralProblem::new(
            &GraphConfig { n, alpha, p },
            &BranchParams::new(omega, k),
            ToleranceSet::default(),
        )
        .unwrap()
    }

    #[test]
    fn f_at_zero_examples() {
        let pr = problem(3, -1.0, 1.0, 4.0, 1);
        assert_eq!(f_at_zero_closed_form(pr.config(), pr.branch()), 2.0);
        let f0 = pr.f(0.0).unwrap().finite().unwrap();
        assert!((f0 - 2.0).abs() < 1e-8 * 2.0, "{f0}");

        let pr = problem(3, 1.0, 1.0, 4.0, 0);
        assert_eq!(f_at_zero_closed_form(pr.config(), pr.branch()), -34.0);
        let f0 = pr.f(0.0).unwrap().finite().unwrap();
        assert!((f0 + 34.0).abs() < 1e-8 * 34.0, "{f0}");
        assert!(f0 < 1.0);
    }

    #[test]
    fn f_tends_to_minus_infinity() {
        for pr in [problem(3, -1.0, 1.0, 4.0, 1), problem(5, 2.0, 0.5, 5.0, 2)] {
            assert!(pr.f(-1e6).unwrap().finite().unwrap() < -1e3);
        }
    }

    #[test]
    fn lambda_star_bracket_and_range() {
        let pr = problem(3, -1.0, 1.0, 4.0, 1);
        let l0 = pr.shooter().lambda0().unwrap();
        assert!((l0 + 12.0).abs() < 1e-8 * 12.0);
        let ls = pr.lambda_star().unwrap();
        assert!(l0 < ls && ls < 0.0, "{ls}");
        let z = pr.shooter().track_zero(ls).unwrap();
        assert!((z.x0 + pr.shift().abs()).abs() < 1e-8);
    }

    #[test]
    fn lambda_star_depends_only_on_p_omega_and_shift() {
        // same |a_K| from (N-2K) = 1 and (N-2K) = 3 with alpha scaled by 3
        let a = problem(3, -1.0, 1.0, 4.0, 1);
        let b = problem(5, -3.0, 1.0, 4.0, 1);
        assert!((a.shift() - b.shift()).abs() < 1e-15);
        let (la, lb) = (a.lambda_star().unwrap(), b.lambda_star().unwrap());
        assert!((la - lb).abs() < 1e-12 * la.abs());
    }

    #[test]
    fn two_roots_straddle_the_pole_for_attractive_bumps() {
        let pr = problem(3, -1.0, 1.0, 4.0, 1);
        let ls = pr.lambda_star().unwrap();
        let roots = pr.roots().unwrap();
        assert_eq!(roots.len(), 2);
        assert!(
            roots[0] < ls && ls < roots[1] && roots[1] < 0.0,
            "{roots:?} {ls}"
        );
    }

    #[test]
    fn one_root_below_the_pole_for_repulsive() {
        let pr = problem(3, 1.0, 1.0, 4.0, 0);
        let ls = pr.lambda_star().unwrap();
        let roots = pr.roots().unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0] < ls);
    }

    #[test]
    fn pole_signs() {
        for pr in [problem(3, -1.0, 1.0, 4.0, 1), problem(4, 1.0, 2.0, 1.0, 1)] {
            let ls = pr.lambda_star().unwrap();
            let d = 1e-6 * ls.abs();
            assert!(pr.f(ls - d).unwrap().finite().unwrap() > 1e3);
            assert!(pr.f(ls + d).unwrap().finite().unwrap() < -1e3);
        }
    }

    #[test]
    fn f_is_increasing_between_poles() {
        let pr = problem(5, -1.0, 1.0, 4.0, 2);
        let ls = pr.lambda_star().unwrap();
        let left: Vec<f64> = (1..=8).map(|i| ls - 20.0 + 2.4 * i as f64).collect();
        let right: Vec<f64> = (1..=8).map(|i| ls * (1.0 - i as f64 / 8.0)).collect();
        for side in [left, right] {
            let vals: Vec<f64> = side
                .iter()
                .map(|&l| pr.f(l).unwrap().finite().unwrap())
                .collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
        }
    }

    #[test]
    fn determinant_factors() {
        // K = 2: lambda_* is a zero of v(a_K) but not of the bracket
        let pr = problem(5, -1.0, 1.0, 4.0, 2);
        let ls = pr.lambda_star().unwrap();
        let at_star = pr.det_factors(ls).unwrap();
        assert!(at_star.shift_value.abs() < 1e-8);
        assert!(at_star.case_c.abs() > 1e-3);
        let roots = pr.roots().unwrap();
        let at_root = pr.det_factors(roots[0]).unwrap();
        assert!(at_root.case_c.abs() < 1e-8);
        assert!(at_root.shift_value.abs() > 1e-3 && at_root.opposite_value.abs() > 1e-3);
        let generic = pr.det_factors(0.5 * (roots[0] + ls)).unwrap();
        assert!(generic.case_c.abs() > 1e-3 && generic.shift_value.abs() > 1e-3);

        let k0 = problem(3, -1.0, 1.0, 1.0, 0);
        assert_eq!(k0.det_factors(-0.5).unwrap().shift_value, 1.0);
    }

    #[test]
    fn report_examples() {
        let r = problem(3, -1.0, 1.0, 4.0, 1).report().unwrap();
        assert_eq!((r.n_lplus, r.z_lplus, r.n_lminus, r.z_lminus), (2, 0, 0, 1));
        assert_eq!(r.eigenvalues.len(), 2);
        assert_eq!(r.verdict, Verdict::Unstable);

        let r = problem(5, 1.0, 1.0, 4.0, 1).report().unwrap();
        assert_eq!(r.n_lplus, 4);
        assert_eq!(r.eigenvalues.len(), 2);
        assert_eq!(r.eigenvalues[1].kind, EigenKind::CaseBTailZero);
        assert_eq!(r.eigenvalues[1].multiplicity, 3);
        assert!(r.eigenvalues[0].lambda < r.eigenvalues[1].lambda);
        assert_eq!(r.verdict, Verdict::Unstable);

        let r = problem(3, -1.0, 1.0, 1.0, 0).report().unwrap();
        assert_eq!((r.n_lplus, r.z_lplus), (1, 0));
        assert_eq!(r.verdict, Verdict::StableCandidate);
        assert!(r.pole.is_none());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn report_serializes_with_documented_keys() {
        let r = problem(3, -1.0, 1.0, 4.0, 1).report().unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "config",
            "branch",
            "eigenvalues",
            "n_Lplus",
            "z_Lplus",
            "n_Lminus",
            "z_Lminus",
            "verdict",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["verdict"], "unstable");
        assert_eq!(v["eigenvalues"][0]["kind"], "case_c_scalar");
        assert_eq!(v["config"]["N"], 3);
    }
}
