//! CSV and JSON emitters. Every CSV starts with a header row; floats are
//! written in shortest round-trip form, so identical inputs give identical
//! bytes.

use std::io::Write;

use serde::Serialize;

use crate::dynamics::EvolutionTrace;
use crate::error::{Error, Result};
use crate::fem::Mesh;
use crate::shooting::Shooter;
use crate::spectral::{FValue, SpectralProblem};
use crate::star::StarVector;
use crate::stationary::StationaryState;

fn output<E: std::fmt::Display>(e: E) -> Error {
    Error::Output(e.to_string())
}

/// Writes `rows` as CSV with a header taken from the field names.
pub fn write_csv<R: Serialize, W: Write>(rows: &[R], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to write".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(output)?;
    }
    w.flush().map_err(output)
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(output)?;
    out.write_all(b"\n").map_err(output)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub edge_index: usize,
    pub x: f64,
    pub value: f64,
}

/// The closed-form profile on `intervals + 1` nodes of every edge.
pub fn profile_rows(state: &StationaryState, length: f64, intervals: usize) -> Vec<ProfileRow> {
    let samples = state.sample(length, intervals);
    let h = samples.step();
    samples
        .edges
        .iter()
        .enumerate()
        .flat_map(|(j, e)| {
            e.iter().enumerate().map(move |(i, &value)| ProfileRow {
                edge_index: j,
                x: i as f64 * h,
                value,
            })
        })
        .collect()
}

/// A nodal field (an eigenvector, say) with the vertex and the Dirichlet end
/// on every edge.
pub fn field_rows(mesh: &Mesh, v: &StarVector<f64>) -> Vec<ProfileRow> {
    let h = mesh.step();
    (0..mesh.edges)
        .flat_map(|j| {
            v.edge_with_ends(j)
                .into_iter()
                .enumerate()
                .map(move |(i, value)| ProfileRow {
                    edge_index: j,
                    x: i as f64 * h,
                    value,
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FCurveRow {
    pub lambda: f64,
    /// Empty at the pole.
    #[serde(rename = "F")]
    pub f: Option<f64>,
}

/// `F` on `lambdas`. Points equal to `pole` (the located root of the
/// denominator) are written empty, like points where it vanishes exactly.
pub fn f_curve_rows(
    problem: &SpectralProblem,
    lambdas: &[f64],
    pole: Option<f64>,
) -> Result<Vec<FCurveRow>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let f = if Some(lambda) == pole {
                None
            } else {
                match problem.f(lambda)? {
                    FValue::Finite(v) => Some(v),
                    FValue::Pole => None,
                }
            };
            Ok(FCurveRow { lambda, f })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingRow {
    pub lambda: f64,
    pub x: f64,
    pub v: f64,
}

/// `v(x; lambda)` for each `lambda` on the points `xs`.
pub fn shooting_rows(shooter: &Shooter, lambdas: &[f64], xs: &[f64]) -> Result<Vec<ShootingRow>> {
    let mut rows = Vec::with_capacity(lambdas.len() * xs.len());
    for &lambda in lambdas {
        let mu = (shooter.omega() - lambda).sqrt();
        let vals = shooter.sample(lambda, xs)?;
        for (&x, (w, _)) in xs.iter().zip(vals) {
            rows.push(ShootingRow {
                lambda,
                x,
                v: w * (-mu * x).exp(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub distance: f64,
    pub theta_star: f64,
}

pub fn trace_rows(trace: &EvolutionTrace) -> Vec<TraceRow> {
    (0..trace.times.len())
        .map(|i| TraceRow {
            t: trace.times[i],
            mass: trace.mass[i],
            energy: trace.energy[i],
            distance: trace.orbital_distance[i],
            theta_star: trace.theta_star[i],
        })
        .collect()
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
