//! Gauss rules, Chebyshev points and spectral differentiation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;

use crate::special::beta;

/// Nodes and weights of an interpolatory rule on [−1, 1], nodes ascending.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule with `n` points.
pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi_symmetric(n, 0.0)
}

/// Gauss rule for the weight (1 − z²)^a on [−1, 1], a > −1, via
/// Golub–Welsch on the Jacobi matrix of the Gegenbauer recurrence.
pub fn gauss_jacobi_symmetric(n: usize, a: f64) -> Rule {
    assert!(n >= 1 && a > -1.0);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        // β_k of the monic Jacobi(a, a) recurrence
        let b = if (a + 0.5).abs() < 1e-15 {
            if k == 1 { 0.5 } else { 0.25 }
        } else {
            let t = 2.0 * kf + 2.0 * a;
            4.0 * kf * (kf + a) * (kf + a) * (kf + 2.0 * a) / (t * t * (t + 1.0) * (t - 1.0))
        };
        let s = libm::sqrt(b);
        j[(k - 1, k)] = s;
        j[(k, k - 1)] = s;
    }
    let mu0 = beta(0.5, a + 1.0);
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    // symmetrize to kill rounding asymmetry
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    for i in 0..n / 2 {
        let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Chebyshev–Gauss–Lobatto points cos(πj/N), j = 0..N, returned ascending.
pub fn chebyshev_lobatto(n: usize) -> Vec<f64> {
    (0..=n).map(|j| -libm::cos(PI * j as f64 / n as f64)).collect()
}

/// Clenshaw–Curtis weights on the ascending Lobatto points of [`chebyshev_lobatto`].
pub fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    for (j, wj) in w.iter_mut().enumerate() {
        let theta = PI * j as f64 / nf;
        let mut s = 0.0;
        for k in 0..=n / 2 {
            let bk = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
            let kf = k as f64;
            s += bk / (1.0 - 4.0 * kf * kf) * libm::cos(2.0 * kf * theta);
        }
        let cj = if j == 0 || j == n { 1.0 } else { 2.0 };
        *wj = cj / nf * s;
    }
    // ascending order is the reverse of θ order, and the rule is symmetric
    w.reverse();
    w
}

/// Differentiation matrix on arbitrary distinct nodes (barycentric form),
/// row-major n × n.
pub fn differentiation_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut bw = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                bw[j] *= nodes[j] - nodes[k];
            }
        }
        bw[j] = 1.0 / bw[j];
    }
    // rescale to avoid overflow for large n
    let scale = bw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in bw.iter_mut() {
        *v /= scale;
    }
    let mut d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            if i != j {
                let v = bw[j] / bw[i] / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                row += v;
            }
        }
        d[(i, i)] = -row;
    }
    d
}

/// Chebyshev differentiation matrix on the ascending Lobatto points.
pub fn chebyshev_differentiation(n: usize) -> DMatrix<f64> {
    let x = chebyshev_lobatto(n);
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    // sign pattern for ascending points: (−1)^{i+j} as in the classical matrix
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                let sgn = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = c(i) / c(j) * sgn / (x[i] - x[j]);
            }
        }
    }
    for i in 0..=n {
        let mut s = 0.0;
        for j in 0..=n {
            if i != j {
                s += d[(i, j)];
            }
        }
        d[(i, i)] = -s;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(8);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_weight_moments() {
        // ∫ z² (1−z²)^{1/2} dz = π/8
        let r = gauss_jacobi_symmetric(6, 0.5);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x * x).sum();
        assert!((s - PI / 8.0).abs() < 1e-14);
        let r = gauss_jacobi_symmetric(7, -0.5);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(4)).sum();
        assert!((s - 3.0 * PI / 8.0).abs() < 1e-13);
    }

    #[test]
    fn clenshaw_curtis_exactness() {
        let n = 16;
        let x = chebyshev_lobatto(n);
        let w = clenshaw_curtis_weights(n);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let e: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((e - (1f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_derivative_is_spectral() {
        let n = 24;
        let x = chebyshev_lobatto(n);
        let d = chebyshev_differentiation(n);
        let f: Vec<f64> = x.iter().map(|t| (2.0 * t).sin()).collect();
        for i in 0..=n {
            let df: f64 = (0..=n).map(|j| d[(i, j)] * f[j]).sum();
            assert!((df - 2.0 * (2.0 * x[i]).cos()).abs() < 1e-11);
        }
        let db = differentiation_matrix(&x);
        assert!((d - db).abs().max() < 1e-9);
    }
}
