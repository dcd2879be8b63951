//! Piecewise-linear finite elements on a truncated star graph.
//!
//! Each edge `[0, L]` is split into `intervals` equal cells. The vertex node is
//! shared by all edges and the far end of each edge carries a homogeneous
//! Dirichlet condition, so the unknowns are the vertex value and
//! `intervals - 1` interior values per edge. The mass matrix is lumped
//! (trapezoidal nodal quadrature), which keeps it diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::star::{Scalar, StarMatrix, StarVector};
use crate::stationary::EdgeSamples;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub edges: usize,
    pub length: f64,
    pub intervals: usize,
}

impl Mesh {
    pub fn new(edges: usize, length: f64, intervals: usize) -> Result<Self> {
        if edges < 1 {
            return Err(Error::TooFewEdges(edges));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "edge length must be positive, got {length}"
            )));
        }
        if intervals < 2 {
            return Err(Error::TooFewNodes {
                got: intervals,
                required: 2,
            });
        }
        Ok(Self {
            edges,
            length,
            intervals,
        })
    }

    pub fn step(&self) -> f64 {
        self.length / self.intervals as f64
    }

    /// Interior unknowns per edge.
    pub fn interior(&self) -> usize {
        self.intervals - 1
    }

    /// Position of interior node `i` (0-based).
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.step()
    }

    pub fn zeros<T: Scalar>(&self) -> StarVector<T> {
        StarVector::zeros(self.edges, self.interior())
    }

    /// Diagonal of the lumped mass matrix.
    pub fn lumped_mass(&self) -> StarVector<f64> {
        let h = self.step();
        StarVector {
            vertex: 0.5 * h * self.edges as f64,
            edges: vec![vec![h; self.interior()]; self.edges],
        }
    }

    /// Matrix of the form `sum_j int psi_j' phi_j' + alpha psi(0) phi(0)`.
    pub fn stiffness(&self, alpha: f64) -> StarMatrix<f64> {
        let h = self.step();
        let m = self.interior();
        StarMatrix {
            vertex: self.edges as f64 / h + alpha,
            coupling: vec![-1.0 / h; self.edges],
            diag: vec![vec![2.0 / h; m]; self.edges],
            off: vec![vec![-1.0 / h; m.saturating_sub(1)]; self.edges],
        }
    }

    /// Nodal interpolant of `f(edge, x)`; the vertex value is taken from edge 0.
    pub fn sample(&self, f: impl Fn(usize, f64) -> f64) -> StarVector<f64> {
        StarVector {
            vertex: f(0, 0.0),
            edges: (0..self.edges)
                .map(|j| (0..self.interior()).map(|i| f(j, self.node(i))).collect())
                .collect(),
        }
    }

    /// Per-edge arrays including the vertex and the Dirichlet end.
    pub fn to_samples<T: Scalar>(&self, v: &StarVector<T>) -> EdgeSamples<T> {
        EdgeSamples {
            length: self.length,
            edges: (0..self.edges).map(|j| v.edge_with_ends(j)).collect(),
        }
    }

    /// Inverse of [`Mesh::to_samples`]; rejects fields whose edges disagree at
    /// the vertex by more than `1e-12` relative.
    pub fn from_samples<T: Scalar>(&self, s: &EdgeSamples<T>) -> Result<StarVector<T>> {
        if s.edges.len() != self.edges || s.edges.iter().any(|e| e.len() != self.intervals + 1) {
            return Err(Error::InvalidArgument(
                "sample shape does not match the mesh".into(),
            ));
        }
        let v0 = s.edges[0][0];
        let scale = s
            .edges
            .iter()
            .flatten()
            .map(|x| x.modulus())
            .fold(0.0, f64::max);
        if s.edges
            .iter()
            .any(|e| (e[0] - v0).modulus() > 1e-12 * scale)
        {
            return Err(Error::VertexMismatch(
                s.edges.iter().map(|e| e[0].modulus()).collect(),
            ));
        }
        Ok(StarVector {
            vertex: v0,
            edges: s
                .edges
                .iter()
                .map(|e| e[1..self.intervals].to_vec())
                .collect(),
        })
    }

    /// `x^T A x` for real `x`.
    pub fn quadratic_form(a: &StarMatrix<f64>, x: &StarVector<f64>) -> f64 {
        a.mul_vec(x).iter().zip(x.iter()).map(|(u, v)| u * v).sum()
    }
}
