//! Vectors and symmetric matrices on a discretized star graph.
//!
//! Unknowns are one shared vertex value plus `m` interior nodes per edge,
//! numbered outward from the vertex. A matrix couples the vertex to the first
//! node of each edge and neighbouring nodes along an edge, so Gaussian
//! elimination from the edge tips inward creates no fill and costs `O(N m)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + std::fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;

    fn zero() -> Self {
        Self::from_real(0.0)
    }
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarVector<T> {
    pub vertex: T,
    pub edges: Vec<Vec<T>>,
}

impl<T: Scalar> StarVector<T> {
    pub fn zeros(n_edges: usize, m: usize) -> Self {
        Self {
            vertex: T::zero(),
            edges: vec![vec![T::zero(); m]; n_edges],
        }
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn interior(&self) -> usize {
        self.edges.first().map_or(0, Vec::len)
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(T) -> U) -> StarVector<U> {
        StarVector {
            vertex: f(self.vertex),
            edges: self
                .edges
                .iter()
                .map(|e| e.iter().map(|&x| f(x)).collect())
                .collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Self {
        StarVector {
            vertex: f(self.vertex, other.vertex),
            edges: self
                .edges
                .iter()
                .zip(&other.edges)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        std::iter::once(&self.vertex).chain(self.edges.iter().flatten())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        std::iter::once(&mut self.vertex).chain(self.edges.iter_mut().flatten())
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: T, other: &Self) {
        for (x, &y) in self.iter_mut().zip(other.iter()) {
            *x = *x + c * y;
        }
    }

    pub fn scale(&mut self, c: T) {
        for x in self.iter_mut() {
            *x = *x * c;
        }
    }

    /// `sum conj(self_i) w_i other_i` with real diagonal weights.
    pub fn weighted_dot(&self, weights: &StarVector<f64>, other: &Self) -> T {
        let mut acc = T::zero();
        for ((&a, &w), &b) in self.iter().zip(weights.iter()).zip(other.iter()) {
            acc = acc + a.conj() * T::from_real(w) * b;
        }
        acc
    }

    pub fn max_modulus(&self) -> f64 {
        self.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    /// Edge `j` with the vertex value prepended and the Dirichlet zero appended.
    pub fn edge_with_ends(&self, j: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(self.interior() + 2);
        out.push(self.vertex);
        out.extend_from_slice(&self.edges[j]);
        out.push(T::zero());
        out
    }

    /// Swap edge blocks.
    pub fn permute_edges(&self, perm: &[usize]) -> Self {
        StarVector {
            vertex: self.vertex,
            edges: perm.iter().map(|&j| self.edges[j].clone()).collect(),
        }
    }
}

/// Symmetric (not Hermitian) matrix with star sparsity.
#[derive(Debug, Clone, PartialEq)]
pub struct StarMatrix<T> {
    pub vertex: T,
    /// Entry between the vertex and the first node of each edge.
    pub coupling: Vec<T>,
    pub diag: Vec<Vec<T>>,
    /// `off[j][i]` couples nodes `i` and `i+1` of edge `j`.
    pub off: Vec<Vec<T>>,
}

impl<T: Scalar> StarMatrix<T> {
    pub fn n_edges(&self) -> usize {
        self.diag.len()
    }

    pub fn interior(&self) -> usize {
        self.diag.first().map_or(0, Vec::len)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> StarMatrix<U> {
        StarMatrix {
            vertex: f(self.vertex),
            coupling: self.coupling.iter().map(|&x| f(x)).collect(),
            diag: self
                .diag
                .iter()
                .map(|e| e.iter().map(|&x| f(x)).collect())
                .collect(),
            off: self
                .off
                .iter()
                .map(|e| e.iter().map(|&x| f(x)).collect())
                .collect(),
        }
    }

    /// `self + c * diag(d)`.
    pub fn add_diagonal(&self, c: T, d: &StarVector<f64>) -> Self {
        let mut out = self.clone();
        out.vertex = out.vertex + c * T::from_real(d.vertex);
        for (row, dj) in out.diag.iter_mut().zip(&d.edges) {
            for (x, &w) in row.iter_mut().zip(dj) {
                *x = *x + c * T::from_real(w);
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &StarVector<T>) -> StarVector<T> {
        let mut y = StarVector::zeros(self.n_edges(), self.interior());
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = A x` without allocating; `y` must have the shape of `x`.
    pub fn mul_vec_into(&self, x: &StarVector<T>, y: &mut StarVector<T>) {
        let m = self.interior();
        let mut v = self.vertex * x.vertex;
        for j in 0..self.n_edges() {
            let (d, o, xe, ye) = (&self.diag[j], &self.off[j], &x.edges[j], &mut y.edges[j]);
            if m == 0 {
                continue;
            }
            v = v + self.coupling[j] * xe[0];
            for i in 0..m {
                let mut acc = d[i] * xe[i];
                if i > 0 {
                    acc = acc + o[i - 1] * xe[i - 1];
                } else {
                    acc = acc + self.coupling[j] * x.vertex;
                }
                if i + 1 < m {
                    acc = acc + o[i] * xe[i + 1];
                }
                ye[i] = acc;
            }
        }
        y.vertex = v;
    }

    /// Transposed `LDL` factorization by elimination from the edge tips.
    /// Fails when a pivot is smaller than `tiny` times the largest diagonal
    /// modulus.
    pub fn factor(&self, tiny: f64) -> Result<StarFactor<T>> {
        let scale = self
            .diag
            .iter()
            .flatten()
            .map(|x| x.modulus())
            .fold(self.vertex.modulus(), f64::max);
        let threshold = tiny * scale;
        let m = self.interior();
        let mut pivots = Vec::with_capacity(self.n_edges());
        let mut vertex = self.vertex;
        for j in 0..self.n_edges() {
            let (d, o) = (&self.diag[j], &self.off[j]);
            let mut piv = vec![T::zero(); m];
            if m == 0 {
                pivots.push(piv);
                continue;
            }
            piv[m - 1] = d[m - 1];
            for i in (0..m - 1).rev() {
                if piv[i + 1].modulus() <= threshold {
                    return Err(Error::SingularShift(piv[i + 1].modulus()));
                }
                piv[i] = d[i] - o[i] * o[i] / piv[i + 1];
            }
            if piv[0].modulus() <= threshold {
                return Err(Error::SingularShift(piv[0].modulus()));
            }
            vertex = vertex - self.coupling[j] * self.coupling[j] / piv[0];
            pivots.push(piv);
        }
        if vertex.modulus() <= threshold {
            return Err(Error::SingularShift(vertex.modulus()));
        }
        Ok(StarFactor {
            matrix: self.clone(),
            pivots,
            vertex_pivot: vertex,
        })
    }
}

impl StarMatrix<f64> {
    /// Gershgorin lower bound for the pencil `(self, diag(mass))` with
    /// positive `mass`, from the symmetrically scaled matrix.
    pub fn pencil_lower_bound(&self, mass: &StarVector<f64>) -> f64 {
        let m = self.interior();
        let sv = mass.vertex.sqrt();
        let mut radius = 0.0;
        let mut bound = f64::INFINITY;
        for j in 0..self.n_edges() {
            if m == 0 {
                continue;
            }
            let b = &mass.edges[j];
            radius += self.coupling[j].abs() / (sv * b[0].sqrt());
            for i in 0..m {
                let mut r = 0.0;
                if i == 0 {
                    r += self.coupling[j].abs() / (sv * b[0].sqrt());
                } else {
                    r += self.off[j][i - 1].abs() / (b[i] * b[i - 1]).sqrt();
                }
                if i + 1 < m {
                    r += self.off[j][i].abs() / (b[i] * b[i + 1]).sqrt();
                }
                bound = bound.min(self.diag[j][i] / b[i] - r);
            }
        }
        bound.min(self.vertex / mass.vertex - radius)
    }
}

#[derive(Debug, Clone)]
pub struct StarFactor<T> {
    matrix: StarMatrix<T>,
    pivots: Vec<Vec<T>>,
    vertex_pivot: T,
}

impl<T: Scalar> StarFactor<T> {
    pub fn pivots(&self) -> impl Iterator<Item = &T> {
        std::iter::once(&self.vertex_pivot).chain(self.pivots.iter().flatten())
    }

    pub fn solve(&self, rhs: &StarVector<T>) -> StarVector<T> {
        let mut y = rhs.clone();
        self.solve_in_place(&mut y);
        y
    }

    /// Overwrites `y` (the right-hand side) with the solution.
    pub fn solve_in_place(&self, y: &mut StarVector<T>) {
        let a = &self.matrix;
        let m = a.interior();
        let mut yv = y.vertex;
        for j in 0..a.n_edges() {
            if m == 0 {
                continue;
            }
            let (o, piv, ye) = (&a.off[j], &self.pivots[j], &mut y.edges[j]);
            for i in (0..m - 1).rev() {
                ye[i] = ye[i] - o[i] * ye[i + 1] / piv[i + 1];
            }
            yv = yv - a.coupling[j] * ye[0] / piv[0];
        }
        let xv = yv / self.vertex_pivot;
        y.vertex = xv;
        for j in 0..a.n_edges() {
            if m == 0 {
                continue;
            }
            let (o, piv, xe) = (&a.off[j], &self.pivots[j], &mut y.edges[j]);
            xe[0] = (xe[0] - a.coupling[j] * xv) / piv[0];
            for i in 1..m {
                xe[i] = (xe[i] - o[i - 1] * xe[i - 1]) / piv[i];
            }
        }
    }
}

impl StarFactor<f64> {
    /// Number of negative pivots, which by Sylvester's law equals the number
    /// of negative eigenvalues of the factored matrix.
    pub fn negative_pivots(&self) -> usize {
        self.pivots().filter(|&&d| d < 0.0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense copy for brute-force checks; index 0 is the vertex.
    fn dense(a: &StarMatrix<f64>) -> Vec<Vec<f64>> {
        let (n, m) = (a.n_edges(), a.interior());
        let size = 1 + n * m;
        let idx = |j: usize, i: usize| 1 + j * m + i;
        let mut d = vec![vec![0.0; size]; size];
        d[0][0] = a.vertex;
        for j in 0..n {
            d[0][idx(j, 0)] = a.coupling[j];
            d[idx(j, 0)][0] = a.coupling[j];
            for i in 0..m {
                d[idx(j, i)][idx(j, i)] = a.diag[j][i];
                if i + 1 < m {
                    d[idx(j, i)][idx(j, i + 1)] = a.off[j][i];
                    d[idx(j, i + 1)][idx(j, i)] = a.off[j][i];
                }
            }
        }
        d
    }

    fn sample_matrix(shift: f64) -> StarMatrix<f64> {
        let (n, m) = (3, 5);
        StarMatrix {
            vertex: 1.5 - shift,
            coupling: vec![-1.0, -0.5, -0.8],
            diag: (0..n)
                .map(|j| {
                    (0..m)
                        .map(|i| 2.0 + 0.3 * j as f64 - 0.7 * ((i * 3 + j) % 4) as f64 - shift)
                        .collect()
                })
                .collect(),
            off: (0..n)
                .map(|j| (0..m - 1).map(|i| -1.0 + 0.1 * (i + j) as f64).collect())
                .collect(),
        }
    }

    /// Negative eigenvalue count by a dense Jacobi sweep.
    #[allow(clippy::needless_range_loop)]
    fn dense_negative_count(mut a: Vec<Vec<f64>>) -> usize {
        let n = a.len();
        for _ in 0..100 {
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-15 {
                        continue;
                    }
                    let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).filter(|&i| a[i][i] < 0.0).count()
    }

    #[test]
    fn solve_matches_multiplication() {
        let a = sample_matrix(0.1);
        let mut x = StarVector::zeros(3, 5);
        for (k, v) in x.iter_mut().enumerate() {
            *v = (k as f64 * 0.37).sin();
        }
        let b = a.mul_vec(&x);
        let y = a.factor(1e-14).unwrap().solve(&b);
        for (u, v) in x.iter().zip(y.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn mul_matches_dense() {
        let a = sample_matrix(0.0);
        let d = dense(&a);
        let mut x = StarVector::zeros(3, 5);
        for (k, v) in x.iter_mut().enumerate() {
            *v = 1.0 + k as f64;
        }
        let flat: Vec<f64> = x.iter().copied().collect();
        let y: Vec<f64> = a.mul_vec(&x).iter().copied().collect();
        for (row, yi) in d.iter().zip(&y) {
            let expect: f64 = row.iter().zip(&flat).map(|(r, v)| r * v).sum();
            assert!((expect - yi).abs() < 1e-12);
        }
    }

    #[test]
    fn inertia_matches_dense_eigenvalues() {
        for shift in [-2.0, -0.5, 0.0, 0.7, 1.3, 2.2, 4.0] {
            let a = sample_matrix(shift);
            let count = a.factor(1e-14).unwrap().negative_pivots();
            assert_eq!(count, dense_negative_count(dense(&a)), "shift {shift}");
        }
    }

    #[test]
    fn gershgorin_bound_is_below_spectrum() {
        let a = sample_matrix(0.0);
        let mass = StarVector {
            vertex: 0.5,
            edges: vec![vec![1.0; 5]; 3],
        };
        let lb = a.pencil_lower_bound(&mass);
        assert_eq!(
            a.add_diagonal(-lb, &mass)
                .factor(1e-14)
                .unwrap()
                .negative_pivots(),
            0
        );
    }

    #[test]
    fn complex_solve() {
        let a = sample_matrix(-3.0).map(|x| Complex64::new(x, 0.3 * x));
        let mut x = StarVector::<Complex64>::zeros(3, 5);
        for (k, v) in x.iter_mut().enumerate() {
            *v = Complex64::new(k as f64, 1.0);
        }
        let y = a.factor(1e-14).unwrap().solve(&a.mul_vec(&x));
        for (u, v) in x.iter().zip(y.iter()) {
            assert!((u - v).norm() < 1e-11 * u.norm().max(1.0), "{u} {v}");
        }
    }

    #[test]
    fn singular_pivot_detected() {
        let a = StarMatrix {
            vertex: 1.0,
            coupling: vec![1.0, 1.0],
            diag: vec![vec![1.0], vec![1.0]],
            off: vec![vec![], vec![]],
        };
        // vertex pivot 1 - 1 - 1 = -1; shift the vertex to make it vanish
        let mut b = a.clone();
        b.vertex = 2.0;
        assert!(matches!(b.factor(1e-12), Err(Error::SingularShift(_))));
        assert_eq!(a.factor(1e-12).unwrap().negative_pivots(), 1);
    }
}
