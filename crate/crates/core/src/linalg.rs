//! Banded and small dense linear algebra.
//!
//! Symmetric tridiagonal matrices carry almost every eigenproblem in the
//! crate. Eigenvalues are located by Sylvester inertia (Sturm counts) and
//! bisection, which extends cleanly to problems restricted to the orthogonal
//! complement of a few constraint vectors.

use alloc::vec;
use alloc::vec::Vec;

/// Symmetric tridiagonal matrix: `diag[i]`, and `off[i]` couples i and i+1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

const PIVOT_FLOOR: f64 = 1e-300;

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        SymTridiagonal { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Matrix–vector product.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Pivots of the LDLᵀ factorization of `self − shift·I`.
    fn pivots(&self, shift: f64) -> Vec<f64> {
        let n = self.len();
        let mut d = Vec::with_capacity(n);
        let mut prev = 1.0;
        for i in 0..n {
            let mut p = self.diag[i] - shift;
            if i > 0 {
                p -= self.off[i - 1] * self.off[i - 1] / prev;
            }
            if p.abs() < PIVOT_FLOOR {
                p = -PIVOT_FLOOR;
            }
            d.push(p);
            prev = p;
        }
        d
    }

    /// Number of eigenvalues strictly below `shift`.
    pub fn count_below(&self, shift: f64) -> usize {
        self.pivots(shift).iter().filter(|p| **p < 0.0).count()
    }

    /// Solves `(self − shift·I) x = b`, returning x and the negative-pivot count.
    pub fn shifted_solve(&self, shift: f64, b: &[f64]) -> (Vec<f64>, usize) {
        let n = self.len();
        let d = self.pivots(shift);
        let neg = d.iter().filter(|p| **p < 0.0).count();
        // L has unit diagonal and subdiagonal l_i = off[i-1]/d[i-1]
        let mut y = b.to_vec();
        for i in 1..n {
            y[i] -= self.off[i - 1] / d[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= self.off[i] / d[i] * y[i + 1];
        }
        (y, neg)
    }

    /// Solves `self · x = b` (the matrix must be nonsingular).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.shifted_solve(0.0, b).0
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `count` smallest eigenvalues, ascending.
    pub fn smallest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        let counter = |x: f64| self.count_below(x);
        bisect_eigenvalues(&counter, lo, hi, count.min(self.len()))
    }

    /// Same spectrum restricted to the orthogonal complement of `constraints`
    /// (each a vector of length `len()`, linearly independent).
    ///
    /// Inertia of the bordered system [[A−σ, C], [Cᵀ, 0]] gives
    /// neg(A−σ on C⊥) = neg(A−σ) + pos(Cᵀ(A−σ)⁻¹C) − k.
    pub fn constrained_count_below(&self, shift: f64, constraints: &[Vec<f64>]) -> usize {
        let k = constraints.len();
        if k == 0 {
            return self.count_below(shift);
        }
        let mut neg = 0;
        let mut sols = Vec::with_capacity(k);
        for c in constraints {
            let (x, ng) = self.shifted_solve(shift, c);
            neg = ng;
            sols.push(x);
        }
        let mut s = nalgebra::DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                s[(i, j)] = dot(&constraints[i], &sols[j]);
            }
        }
        let s = 0.5 * (&s + s.transpose());
        let pos = s.symmetric_eigenvalues().iter().filter(|v| **v > 0.0).count();
        (neg + pos).saturating_sub(k)
    }

    /// The `count` smallest eigenvalues on the complement of `constraints`.
    pub fn smallest_constrained_eigenvalues(&self, count: usize, constraints: &[Vec<f64>]) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        let counter = |x: f64| self.constrained_count_below(x, constraints);
        let avail = self.len().saturating_sub(constraints.len());
        bisect_eigenvalues(&counter, lo, hi, count.min(avail))
    }
}

/// Bisection on a monotone eigenvalue counting function.
pub fn bisect_eigenvalues(count_below: &dyn Fn(f64) -> usize, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let width = (hi - lo).abs().max(1.0);
    let lo = lo - 1e-3 * width;
    let hi = hi + 1e-3 * width;
    let mut out = Vec::with_capacity(count);
    let mut start = lo;
    for j in 0..count {
        let (mut a, mut b) = (start, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if count_below(mid) > j {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
                break;
            }
        }
        let ev = 0.5 * (a + b);
        out.push(ev);
        start = a;
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves a general tridiagonal system (Thomas algorithm, no pivoting).
/// `lower[i]` multiplies x[i] in row i+1, `upper[i]` multiplies x[i+1] in row i.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = rhs.to_vec();
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return None;
    }
    x[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return None;
        }
        x[i] = (x[i] - lower[i - 1] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}
