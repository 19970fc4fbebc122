use alloc::sync::Arc;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{ensure, Result};
use crate::quadrature::{differentiation_matrix, gauss_jacobi_symmetric};

/// Gauss nodes in z = cos θ for zonal functions on Sᵈ, with the weight
/// (1 − z²)^{(d−2)/2} normalized to the uniform probability measure.
#[derive(Debug, Clone)]
pub struct ZonalGrid {
    d: u32,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    diff: DMatrix<f64>,
}

impl ZonalGrid {
    pub fn new(d: u32, n_nodes: usize) -> Result<Self> {
        ensure!(d >= 1, "sphere dimension must be at least 1");
        ensure!(n_nodes >= 4, "need at least 4 zonal nodes, got {n_nodes}");
        let a = (d as f64 - 2.0) / 2.0;
        let rule = gauss_jacobi_symmetric(n_nodes, a);
        let total: f64 = rule.weights.iter().sum();
        let weights = rule.weights.iter().map(|w| w / total).collect();
        let mut diff = differentiation_matrix(&rule.nodes);
        // diagonal from the row sums, so constants differentiate to exactly 0
        for i in 0..n_nodes {
            let off: f64 = (0..n_nodes).filter(|j| *j != i).map(|j| diff[(i, j)]).sum();
            diff[(i, i)] = -off;
        }
        Ok(ZonalGrid { d, nodes: rule.nodes, weights, diff })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Probability weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn differentiation(&self) -> &DMatrix<f64> {
        &self.diff
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| (0..self.len()).map(|j| self.diff[(i, j)] * f[j]).sum()).collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }
}

/// Zonal function sampled on a [`ZonalGrid`].
#[derive(Debug, Clone)]
pub struct ZonalProfile {
    pub grid: Arc<ZonalGrid>,
    pub values: Vec<f64>,
}

impl ZonalProfile {
    pub fn new(grid: Arc<ZonalGrid>, values: Vec<f64>) -> Result<Self> {
        ensure!(values.len() == grid.len(), "expected {} zonal values, got {}", grid.len(), values.len());
        ensure!(values.iter().all(|v| v.is_finite()), "zonal values must be finite");
        Ok(ZonalProfile { grid, values })
    }

    pub fn from_fn(grid: Arc<ZonalGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&z| f(z)).collect();
        ZonalProfile { grid, values }
    }

    /// (∫|f|^q dμ)^{1/q}.
    pub fn norm(&self, q: f64) -> f64 {
        let s: Vec<f64> = self.values.iter().map(|v| libm::pow(libm::fabs(*v), q)).collect();
        libm::pow(self.grid.integrate(&s), 1.0 / q)
    }

    /// ‖∇f‖² = ∫(1 − z²) f'² dμ.
    pub fn dirichlet(&self) -> f64 {
        let df = self.grid.derivative(&self.values);
        let s: Vec<f64> = self.grid.nodes().iter().zip(&df).map(|(z, d)| (1.0 - z * z) * d * d).collect();
        self.grid.integrate(&s)
    }
}

/// Collocation residual of −(p−2)[(1−z²)u'' − d z u'] + λu − u^{p−1} at the
/// Gauss nodes (interior, so no endpoint closure is needed).
pub fn residual(u: &ZonalProfile, lambda: f64, p: f64) -> Result<Vec<f64>> {
    ensure!(u.values.iter().all(|v| *v > 0.0), "residual needs a positive profile");
    ensure!(lambda.is_finite() && p.is_finite() && p > 1.0, "invalid lambda = {lambda} or p = {p}");
    let g = &u.grid;
    let du = g.derivative(&u.values);
    let d2u = g.derivative(&du);
    let df = g.d() as f64;
    Ok(g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let lap = (1.0 - z * z) * d2u[i] - df * z * du[i];
            -(p - 2.0) * lap + lambda * u.values[i] - libm::pow(u.values[i], p - 1.0)
        })
        .collect())
}

/// Gegenbauer polynomial C_ℓ^{(ν)}(z) by the three-term recurrence.
pub fn gegenbauer(l: usize, nu: f64, z: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let mut c0 = 1.0;
    let mut c1 = 2.0 * nu * z;
    for k in 1..l {
        let kf = k as f64;
        let c2 = (2.0 * z * (kf + nu) * c1 - (kf + 2.0 * nu - 1.0) * c0) / (kf + 1.0);
        c0 = c1;
        c1 = c2;
    }
    c1
}

/// ℓ-th zonal spherical harmonic on Sᵈ (unnormalized): Gegenbauer C_ℓ^{((d−1)/2)},
/// or the Chebyshev polynomial T_ℓ when d = 1.
pub fn zonal_harmonic(d: u32, l: usize, z: f64) -> f64 {
    if d == 1 {
        libm::cos(l as f64 * libm::acos(z.clamp(-1.0, 1.0)))
    } else {
        gegenbauer(l, (d as f64 - 1.0) / 2.0, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonics_are_orthogonal_and_eigen() {
        let g = ZonalGrid::new(3, 24).unwrap();
        for l in 0..5 {
            for k in 0..5 {
                let s: Vec<f64> = g.nodes().iter().map(|&z| zonal_harmonic(3, l, z) * zonal_harmonic(3, k, z)).collect();
                let v = g.integrate(&s);
                if l != k {
                    assert!(v.abs() < 1e-13);
                }
            }
            // ‖∇Y‖² = ℓ(ℓ+d−1)‖Y‖²
            let y = ZonalProfile::from_fn(Arc::new(g.clone()), |z| zonal_harmonic(3, l, z));
            let ratio = y.dirichlet() / (y.norm(2.0) * y.norm(2.0));
            assert!((ratio - (l * (l + 2)) as f64).abs() < 1e-10);
        }
    }
}
