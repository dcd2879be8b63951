//! The decaying solution checked against an independent integral-equation
//! solve. With `w = v e^{mu x}` and `Q` the well depth,
//! `w(x) = 1 - (1/2mu) int_x^inf (1 - e^{-2mu(y-x)}) Q(y) w(y) dy`,
//! discretized by the trapezoid rule and Richardson-extrapolated.

use starnls::shooting::Shooter;
use starnls::ToleranceSet;

fn well(p: f64, omega: f64, x: f64) -> f64 {
    let s = 1.0 / (p * omega.sqrt() * x).cosh();
    (2.0 * p + 1.0) * (p + 1.0) * omega * s * s
}

/// `w` at `x_top - i h` for `i = 0..=n`.
fn volterra(p: f64, omega: f64, lambda: f64, x_top: f64, x_min: f64, n: usize) -> Vec<f64> {
    let mu = (omega - lambda).sqrt();
    let h = (x_top - x_min) / n as f64;
    let decay = (-2.0 * mu * h).exp();
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    let mut g_prev = well(p, omega, x_top);
    let (mut plain, mut weighted) = (0.0, 0.0);
    for i in 1..=n {
        let x = x_top - i as f64 * h;
        // the new node's own contributions cancel between the two integrals
        plain += 0.5 * h * g_prev;
        weighted = decay * (weighted + 0.5 * h * g_prev);
        let wi = 1.0 - (plain - weighted) / (2.0 * mu);
        let g = well(p, omega, x) * wi;
        plain += 0.5 * h * g;
        weighted += 0.5 * h * g;
        w.push(wi);
        g_prev = g;
    }
    w
}

#[test]
fn shooting_agrees_with_integral_equation() {
    let tol = ToleranceSet::default();
    for &(p, omega) in &[(0.5, 1.0), (1.0, 4.0), (2.0, 1.0), (3.0, 4.0)] {
        let kappa = p * f64::sqrt(omega);
        let shooter = Shooter::new(p, omega, tol).unwrap();
        let lambda0 = omega * (1.0 - (p + 1.0) * (p + 1.0));
        let (x_top, x_min) = (40.0 / kappa, -3.0 / kappa);
        let n = 200_000;
        for &lambda in &[0.5 * lambda0, -0.1 * omega, 0.5 * omega] {
            let w1 = volterra(p, omega, lambda, x_top, x_min, n);
            let w2 = volterra(p, omega, lambda, x_top, x_min, 2 * n);
            let idx: Vec<usize> = (0..=40).map(|k| n - k * 1000).collect();
            let xs: Vec<f64> = idx
                .iter()
                .map(|&i| x_top - i as f64 * (x_top - x_min) / n as f64)
                .collect();
            let shot = shooter.sample(lambda, &xs).unwrap();
            let scale = idx.iter().map(|&i| w1[i].abs()).fold(1.0, f64::max);
            for (k, &i) in idx.iter().enumerate() {
                let reference = (4.0 * w2[2 * i] - w1[i]) / 3.0;
                let err = (shot[k].0 - reference).abs() / scale;
                assert!(
                    err < 1e-8,
                    "p={p} omega={omega} lambda={lambda} x={} err={err:e}",
                    xs[k]
                );
            }
        }
    }
}
