//! The decaying solution `v(x; lambda)` of
//!
//! ```text
//! -v'' + omega v - Q(x) v = lambda v,   Q(x) = (2p+1)(p+1) omega sech^2(p sqrt(omega) x),
//! ```
//!
//! normalized by `v(x) e^{mu x} -> 1` as `x -> +inf`, `mu = sqrt(omega - lambda)`.
//!
//! The solver works with `w = v e^{mu x}`, which satisfies `w'' = 2 mu w' - Q w`,
//! starts from `w = 1, w' = 0` far out where `Q / (omega - lambda)` is below
//! `far_field_cut`, and marches backward with classical RK4. Backward marching
//! damps the growing mode, and `w` stays bounded on the whole line (it tends to
//! a constant as `x -> -inf`), so no renormalization is ever needed: the
//! exponential factor `e^{-mu x}` is only applied when `v` itself is requested.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ToleranceSet;
use crate::roots::{bisect, illinois};
use crate::stationary::sech2;

/// Step cap relative to `1/mu`.
const MU_STEP: f64 = 0.1;
/// Extra far-field margin in units of `1 / (p sqrt(omega))`.
const FAR_FIELD_MARGIN: f64 = 5.0;

#[inline(always)]
fn rk4(w: f64, dw: f64, s: f64, two_mu: f64, qa: f64, qm: f64, qb: f64) -> (f64, f64) {
    let k1w = dw;
    let k1d = two_mu * dw - qa * w;
    let w2 = w + 0.5 * s * k1w;
    let d2 = dw + 0.5 * s * k1d;
    let k2w = d2;
    let k2d = two_mu * d2 - qm * w2;
    let w3 = w + 0.5 * s * k2w;
    let d3 = dw + 0.5 * s * k2d;
    let k3w = d3;
    let k3d = two_mu * d3 - qm * w3;
    let w4 = w + s * k3w;
    let d4 = dw + s * k3d;
    let k4w = d4;
    let k4d = two_mu * d4 - qb * w4;
    (
        w + s / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
        dw + s / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )
}

/// Reusable shooting engine for fixed `(p, omega)`.
///
/// The potential is tabulated once on the λ-independent RK4 grid, so the many
/// solves performed by root finding only pay for the arithmetic.
#[derive(Debug)]
pub struct Shooter {
    p: f64,
    omega: f64,
    q0: f64,
    kappa: f64,
    tol: ToleranceSet,
    step: f64,
    x_top: f64,
    table: Vec<f64>,
    lambda0: OnceLock<Result<f64>>,
}

impl Shooter {
    pub fn new(p: f64, omega: f64, tol: ToleranceSet) -> Result<Self> {
        Self::build(p, omega, tol, (2.0 * p + 1.0) * (p + 1.0) * omega, -6.0)
    }

    /// Like [`Shooter::new`], with the potential table extended down to
    /// `x_floor` (in units of `1 / (p sqrt(omega))`).
    pub fn with_floor(p: f64, omega: f64, tol: ToleranceSet, scaled_floor: f64) -> Result<Self> {
        Self::build(
            p,
            omega,
            tol,
            (2.0 * p + 1.0) * (p + 1.0) * omega,
            scaled_floor,
        )
    }

    /// Test hook: the free equation `Q = 0`, for which `v = e^{-mu x}` exactly.
    pub fn without_potential(p: f64, omega: f64, tol: ToleranceSet) -> Result<Self> {
        Self::build(p, omega, tol, 0.0, -6.0)
    }

    fn build(p: f64, omega: f64, tol: ToleranceSet, q0: f64, scaled_floor: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidPower(p));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "omega must be positive, got {omega}"
            )));
        }
        tol.check()?;
        let kappa = p * omega.sqrt();
        let step = tol.ode_rel_tol.powf(0.25) / kappa;
        let mut shooter = Self {
            p,
            omega,
            q0,
            kappa,
            tol,
            step,
            x_top: 0.0,
            table: Vec::new(),
            lambda0: OnceLock::new(),
        };
        shooter.x_top = shooter.far_field_start(0.0);
        let floor = scaled_floor.min(0.0) / kappa;
        let halves = (2.0 * (shooter.x_top - floor) / step).ceil() as usize + 2;
        shooter.table = (0..=halves)
            .map(|i| shooter.q(shooter.x_top - i as f64 * 0.5 * step))
            .collect();
        Ok(shooter)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn tolerances(&self) -> &ToleranceSet {
        &self.tol
    }

    /// `p sqrt(omega)`, the inverse length scale of the potential.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    #[inline]
    fn q(&self, x: f64) -> f64 {
        self.q0 * sech2(self.kappa * x)
    }

    /// Where the backward march starts: `Q(X) / (omega - lambda) < far_field_cut`
    /// plus a safety margin.
    pub fn far_field_start(&self, lambda: f64) -> f64 {
        let margin = FAR_FIELD_MARGIN / self.kappa;
        if self.q0 == 0.0 {
            return margin;
        }
        let ratio = self.q0 / (self.tol.far_field_cut * (self.omega - lambda));
        ratio.sqrt().max(1.0).acosh() / self.kappa + margin
    }

    fn mu(&self, lambda: f64) -> Result<f64> {
        if !(lambda < self.omega) {
            return Err(Error::LambdaAboveOmega {
                lambda,
                omega: self.omega,
            });
        }
        Ok((self.omega - lambda).sqrt())
    }

    /// One RK4 step of signed size `x_to - x_from` with directly evaluated `Q`.
    fn partial(&self, two_mu: f64, x_from: f64, w: f64, dw: f64, x_to: f64) -> (f64, f64) {
        let s = x_to - x_from;
        if s == 0.0 {
            return (w, dw);
        }
        rk4(
            w,
            dw,
            s,
            two_mu,
            self.q(x_from),
            self.q(x_from + 0.5 * s),
            self.q(x_to),
        )
    }

    /// Marches from the far field down to the last grid node at or above
    /// `x_min`, calling `visit(x, w, w')` at every node (the start included).
    fn march(&self, lambda: f64, x_min: f64, mut visit: impl FnMut(f64, f64, f64)) -> Result<f64> {
        let mu = self.mu(lambda)?;
        let two_mu = 2.0 * mu;
        let (mut w, mut dw) = (1.0, 0.0);
        if mu * self.step <= MU_STEP && lambda <= 0.0 {
            // tabulated path: fixed grid from x_top
            let h = self.step;
            let mut k = 0usize;
            let mut x = self.x_top;
            visit(x, w, dw);
            while self.x_top - (k + 1) as f64 * h >= x_min {
                let x_next = self.x_top - (k + 1) as f64 * h;
                let (qa, qm, qb) = match self.table.get(2 * k + 2) {
                    Some(&qb) => (self.table[2 * k], self.table[2 * k + 1], qb),
                    None => (self.q(x), self.q(x - 0.5 * h), self.q(x_next)),
                };
                (w, dw) = rk4(w, dw, -h, two_mu, qa, qm, qb);
                k += 1;
                x = x_next;
                visit(x, w, dw);
            }
        } else {
            let h = self.step.min(MU_STEP / mu);
            let start = self.far_field_start(lambda);
            let mut k = 0usize;
            let mut x = start;
            visit(x, w, dw);
            while start - (k + 1) as f64 * h >= x_min {
                let x_next = start - (k + 1) as f64 * h;
                (w, dw) = self.partial(two_mu, x, w, dw, x_next);
                k += 1;
                x = x_next;
                visit(x, w, dw);
            }
        }
        Ok(mu)
    }

    /// Solves down to `x_min` and keeps the whole grid.
    pub fn solve(&self, lambda: f64, x_min: f64) -> Result<ShootingSolution> {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        let mut dws = Vec::new();
        let mu = self.march(lambda, x_min, |x, w, dw| {
            xs.push(x);
            ws.push(w);
            dws.push(dw);
        })?;
        let last = xs.len() - 1;
        if xs[last] > x_min {
            let (w, dw) = self.partial(2.0 * mu, xs[last], ws[last], dws[last], x_min);
            xs.push(x_min);
            ws.push(w);
            dws.push(dw);
        }
        Ok(ShootingSolution {
            lambda,
            mu,
            p: self.p,
            omega: self.omega,
            q0: self.q0,
            kappa: self.kappa,
            xs,
            w: ws,
            dw: dws,
        })
    }

    /// `(w, w')` at each of `points` without storing the grid.
    pub fn sample(&self, lambda: f64, points: &[f64]) -> Result<Vec<(f64, f64)>> {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[b].total_cmp(&points[a]));
        let x_min = points.iter().copied().fold(f64::INFINITY, f64::min);
        let mut out = vec![(1.0, 0.0); points.len()];
        let mut next = 0usize;
        let mut prev: Option<(f64, f64, f64)> = None;
        let mut mu_seen = 0.0;
        let mu = self.march(lambda, x_min, |x, w, dw| {
            if prev.is_none() {
                // points beyond the far-field start
                while next < order.len() && points[order[next]] >= x {
                    out[order[next]] = (w, dw);
                    next += 1;
                }
            } else if let Some((xp, wp, dwp)) = prev {
                while next < order.len() && points[order[next]] >= x {
                    let target = points[order[next]];
                    out[order[next]] = if target == x {
                        (w, dw)
                    } else {
                        self.partial(mu_seen, xp, wp, dwp, target)
                    };
                    next += 1;
                }
            }
            prev = Some((x, w, dw));
            if mu_seen == 0.0 {
                mu_seen = 2.0 * self.mu(lambda).unwrap_or(0.0);
            }
        })?;
        if let Some((xp, wp, dwp)) = prev {
            for &i in &order[next..] {
                out[i] = self.partial(2.0 * mu, xp, wp, dwp, points[i]);
            }
        }
        Ok(out)
    }

    /// `v'(x)/v(x) = -mu + w'/w` at each point.
    pub fn log_derivatives(&self, lambda: f64, points: &[f64]) -> Result<Vec<f64>> {
        let mu = self.mu(lambda)?;
        self.sample(lambda, points)?
            .into_iter()
            .zip(points)
            .map(|((w, dw), &x)| {
                if w.abs() <= f64::EPSILON * (dw.abs() / mu) {
                    Err(Error::ZeroDenominator { x })
                } else {
                    Ok(-mu + dw / w)
                }
            })
            .collect()
    }

    /// `sign(v'(0; lambda))`-carrying quantity `w'(0) - mu w(0)`.
    fn even_defect(&self, lambda: f64) -> Result<f64> {
        let mu = self.mu(lambda)?;
        let (w, dw) = self.sample(lambda, &[0.0])?[0];
        Ok(dw - mu * w)
    }

    /// The unique `lambda0 < 0` with `v'(0; lambda0) = 0` (the even ground
    /// state of the whole-line operator), by bracketed root finding. Cached.
    pub fn lambda0(&self) -> Result<f64> {
        self.lambda0
            .get_or_init(|| {
                let pt = self.omega * (1.0 - (self.p + 1.0).powi(2));
                let (lo, hi) = (2.0 * pt, 0.0);
                let (f_lo, f_hi) = (self.even_defect(lo)?, self.even_defect(hi)?);
                if f_lo >= 0.0 || f_hi <= 0.0 {
                    return Err(Error::BracketFailure {
                        what: "lambda0",
                        lo,
                        hi,
                    });
                }
                illinois(lo, f_lo, hi, f_hi, self.tol.root_tol, 0.0, "lambda0", |l| {
                    self.even_defect(l)
                })
            })
            .clone()
    }

    /// The unique zero `x0(lambda)` of `v(.; lambda)` for `lambda in (lambda0, 0]`.
    pub fn track_zero(&self, lambda: f64) -> Result<ZeroLocation> {
        if lambda > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "zero tracking needs lambda <= 0, got {lambda}"
            )));
        }
        let lambda0 = self.lambda0()?;
        if lambda <= lambda0 {
            return Err(Error::NoZero { lambda, lambda0 });
        }
        let mut x_left = -1.0 / self.kappa;
        let sol = loop {
            let sol = self.solve(lambda, x_left)?;
            if *sol.w.last().unwrap() < 0.0 {
                break sol;
            }
            x_left *= 2.0;
            if x_left < -4096.0 / self.kappa {
                return Err(Error::NoZero { lambda, lambda0 });
            }
        };
        let k = sol.w.iter().position(|&w| w <= 0.0).unwrap();
        let x0 = if sol.w[k] == 0.0 || k == 0 {
            sol.xs[k]
        } else {
            let (xa, wa, dwa) = (sol.xs[k - 1], sol.w[k - 1], sol.dw[k - 1]);
            let two_mu = 2.0 * sol.mu;
            bisect(
                sol.xs[k],
                xa,
                true,
                0.0,
                1e-3 * self.tol.root_tol / self.kappa,
                "x0",
                |x| Ok(self.partial(two_mu, xa, wa, dwa, x).0),
            )?
        };
        let (_, dw) = sol.w_at(x0)?;
        Ok(ZeroLocation {
            lambda,
            x0,
            slope: dw * (-sol.mu * x0).exp(),
        })
    }
}

/// Where `v(.; lambda)` vanishes; `slope` is `v'(x0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroLocation {
    pub lambda: f64,
    pub x0: f64,
    pub slope: f64,
}

/// `v` and `v'` on a backward RK4 grid, stored as `(w, w')`.
#[derive(Debug, Clone)]
pub struct ShootingSolution {
    pub lambda: f64,
    pub mu: f64,
    p: f64,
    omega: f64,
    q0: f64,
    kappa: f64,
    /// Grid nodes in decreasing order; the last one is `x_min`.
    pub xs: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
}

impl ShootingSolution {
    pub fn x_start(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_min(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `(w, w')` at any `x >= x_min`; beyond the far-field start `w = 1`.
    pub fn w_at(&self, x: f64) -> Result<(f64, f64)> {
        if x < self.x_min() {
            return Err(Error::InvalidArgument(format!(
                "x = {x} below the solved range (x_min = {})",
                self.x_min()
            )));
        }
        if x >= self.xs[0] {
            return Ok((1.0, 0.0));
        }
        // xs is decreasing: count nodes at or above x
        let above = self.xs.partition_point(|&xi| xi >= x);
        let i = above - 1;
        if self.xs[i] == x {
            return Ok((self.w[i], self.dw[i]));
        }
        let s = x - self.xs[i];
        let q = |y: f64| self.q0 * sech2(self.kappa * y);
        Ok(rk4(
            self.w[i],
            self.dw[i],
            s,
            2.0 * self.mu,
            q(self.xs[i]),
            q(self.xs[i] + 0.5 * s),
            q(x),
        ))
    }

    /// `v(x)`; may overflow for `mu * |x|` beyond ~700, use [`Self::v_scaled`] then.
    pub fn v(&self, x: f64) -> Result<f64> {
        Ok(self.w_at(x)?.0 * (-self.mu * x).exp())
    }

    /// `v'(x)`.
    pub fn dv(&self, x: f64) -> Result<f64> {
        let (w, dw) = self.w_at(x)?;
        Ok((dw - self.mu * w) * (-self.mu * x).exp())
    }

    /// `v(x) = w * exp(log_scale)`, returned as `(w, log_scale)`.
    pub fn v_scaled(&self, x: f64) -> Result<(f64, f64)> {
        Ok((self.w_at(x)?.0, -self.mu * x))
    }

    /// The potential term `Q(x)` of the equation being solved.
    pub fn potential(&self, x: f64) -> f64 {
        self.q0 * sech2(self.kappa * x)
    }

    /// `int_x^inf v(y)^2 dy`, trapezoid on the stored grid plus the exact
    /// far-field tail `w^2 e^{-2 mu y}` beyond the start.
    pub fn tail_integral_v2(&self, x: f64) -> Result<f64> {
        if x < self.x_min() {
            return Err(Error::InvalidArgument(format!("x = {x} below x_min")));
        }
        let v2 = |xi: f64, wi: f64| (wi * wi) * (-2.0 * self.mu * xi).exp();
        let mut total = v2(self.xs[0], self.w[0]) / (2.0 * self.mu);
        let above = self.xs.partition_point(|&xi| xi >= x);
        for i in 1..above {
            let (a, b) = (self.xs[i], self.xs[i - 1]);
            total += 0.5 * (b - a) * (v2(a, self.w[i]) + v2(b, self.w[i - 1]));
        }
        let last = above - 1;
        if self.xs[last] > x {
            let (w, _) = self.w_at(x)?;
            total += 0.5 * (self.xs[last] - x) * (v2(x, w) + v2(self.xs[last], self.w[last]));
        }
        Ok(total)
    }
}

/// Decaying solution of the half-line problem on `[x_min, inf)`.
pub fn solve_decaying(
    p: f64,
    omega: f64,
    lambda: f64,
    x_min: f64,
    tol: ToleranceSet,
) -> Result<ShootingSolution> {
    let kappa = p * omega.sqrt();
    Shooter::with_floor(p, omega, tol, (x_min * kappa).min(0.0) - 1.0)?.solve(lambda, x_min)
}

/// `v'(x)/v(x)` computed as `-mu + w'/w`.
pub fn log_derivative(sol: &ShootingSolution, x: f64) -> Result<f64> {
    let (w, dw) = sol.w_at(x)?;
    if w.abs() <= f64::EPSILON * (dw.abs() / sol.mu) {
        return Err(Error::ZeroDenominator { x });
    }
    Ok(-sol.mu + dw / w)
}

/// `lambda0` for `(p, omega)`; the exact value is `omega (1 - (p+1)^2)`.
pub fn find_lambda0(p: f64, omega: f64, tol: ToleranceSet) -> Result<f64> {
    Shooter::new(p, omega, tol)?.lambda0()
}

/// Zero of `v(.; lambda)` for `lambda in (lambda0, 0]`.
pub fn track_zero(p: f64, omega: f64, lambda: f64, tol: ToleranceSet) -> Result<ZeroLocation> {
    Shooter::new(p, omega, tol)?.track_zero(lambda)
}

/// `v(x; 0) = 2^{-1/p} sech^{1/p}(p sqrt(omega) x) tanh(p sqrt(omega) x)`,
/// i.e. `-C phi_omega'(x)` with `C = 2^{-1/p} omega^{-(1+p)/2p}`.
pub fn zero_mode(p: f64, omega: f64, x: f64) -> f64 {
    let c = 2f64.powf(-1.0 / p) * omega.powf(-(1.0 + p) / (2.0 * p));
    -c * crate::stationary::soliton_derivative(p, omega, x)
}
