use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::special::unit_sphere_area;

/// Strictly increasing radial nodes 0 = r₀ < r₁ < … < r_{N−1} = R_max.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

/// Graded grid on [0, R_max]: ξ ↦ R·ξˢ/(ξˢ + (1 − ξ)ˢ), uniform when s = 1.
pub fn make_grid(n_nodes: usize, r_max: f64, stretch: f64) -> Result<RadialGrid> {
    ensure!(n_nodes >= 16, "need at least 16 nodes, got {n_nodes}");
    ensure!(r_max > 0.0 && r_max.is_finite(), "R_max must be positive, got {r_max}");
    ensure!(stretch >= 1.0 && stretch.is_finite(), "stretch must be >= 1, got {stretch}");
    let last = (n_nodes - 1) as f64;
    let nodes = (0..n_nodes)
        .map(|i| {
            let x = i as f64 / last;
            if i == 0 {
                0.0
            } else if i == n_nodes - 1 {
                r_max
            } else {
                let a = libm::pow(x, stretch);
                let b = libm::pow(1.0 - x, stretch);
                r_max * a / (a + b)
            }
        })
        .collect();
    RadialGrid::from_nodes(nodes)
}

impl RadialGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        ensure!(nodes.len() >= 3, "a grid needs at least 3 nodes");
        ensure!(nodes[0] == 0.0, "first node must be r = 0");
        ensure!(
            nodes.windows(2).all(|w| w[1] > w[0] && w[1].is_finite()),
            "grid nodes must be finite and strictly increasing"
        );
        Ok(RadialGrid { nodes })
    }

    /// Uniform in y = log(1 + r/r_core): fine near the origin, geometric far out.
    pub fn log_graded(n_nodes: usize, r_max: f64, r_core: f64) -> Result<Self> {
        ensure!(n_nodes >= 16, "need at least 16 nodes, got {n_nodes}");
        ensure!(r_max > 0.0 && r_core > 0.0, "R_max and r_core must be positive");
        let ymax = libm::log1p(r_max / r_core);
        let last = (n_nodes - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_nodes).map(|i| r_core * libm::expm1(ymax * i as f64 / last)).collect();
        nodes[n_nodes - 1] = r_max;
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Moments (∫ r^{n−1} ℓ(r) dr, ∫ r^{n−1} ρ(r) dr) of the two hat halves on
    /// [a, b], ℓ falling from 1 to 0 and ρ rising.
    fn element_moments(a: f64, b: f64, n: f64) -> (f64, f64) {
        let h = b - a;
        if a == 0.0 {
            let m0 = libm::pow(b, n) / n;
            let m1 = libm::pow(b, n + 1.0) / (n + 1.0);
            return ((b * m0 - m1) / h, m1 / h);
        }
        let (mut l, mut r) = (0.0, 0.0);
        for (x, w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
            let t = 0.5 * (x + 1.0);
            let rr = a + h * t;
            let f = 0.5 * h * w * libm::pow(rr, n - 1.0);
            l += f * (1.0 - t);
            r += f * t;
        }
        (l, r)
    }

    /// Product-trapezoid weights for ∫ f r^{n−1} dr (no angular factor):
    /// the exact integral of the piecewise linear interpolant against r^{n−1}.
    pub fn radial_weights(&self, n: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        for i in 0..self.len() - 1 {
            let (l, r) = Self::element_moments(self.nodes[i], self.nodes[i + 1], n);
            w[i] += l;
            w[i + 1] += r;
        }
        w
    }

    /// Weights for ∫_{B(0,R)} f dx in dimension n, with |S^{n−1}| folded in.
    pub fn weights(&self, n: f64) -> Vec<f64> {
        let s = unit_sphere_area(n);
        self.radial_weights(n).into_iter().map(|w| w * s).collect()
    }

    /// Weights for ∫ f r^{e} dx in dimension n: |S^{n−1}| times the product
    /// rule for r^{n+e−1} dr.
    pub fn weights_with_power(&self, n: f64, e: f64) -> Vec<f64> {
        let s = unit_sphere_area(n);
        self.radial_weights(n + e).into_iter().map(|w| w * s).collect()
    }

    /// Measure of each element [r_i, r_{i+1}], angular factor included.
    pub fn element_measures(&self, n: f64) -> Vec<f64> {
        let s = unit_sphere_area(n);
        self.nodes
            .windows(2)
            .map(|w| {
                let (l, r) = Self::element_moments(w[0], w[1], n);
                s * (l + r)
            })
            .collect()
    }

    /// Composite rule for ∫₀^R g(r) dr on element-wise Gauss points, for
    /// integrands known in closed form.
    pub fn integrate_fn(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for w in self.nodes.windows(2) {
            let h = w[1] - w[0];
            for (x, wt) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
                s += 0.5 * h * wt * g(w[0] + 0.5 * h * (x + 1.0));
            }
        }
        s
    }
}

/// Eight-point Gauss–Legendre rule on [−1, 1]; integrates r^{n−1} times a
/// linear hat exactly for integer n ≤ 15.
pub(crate) const GL8: ([f64; 8], [f64; 8]) = (GL8_NODES, GL8_WEIGHTS);
const GL8_NODES: [f64; 8] = [
    -0.9602898564975362,
    -0.7966664774136267,
    -0.525532409916329,
    -0.18343464249564978,
    0.18343464249564978,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975362,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.10122853629037669,
    0.22238103445337434,
    0.31370664587788705,
    0.36268378337836177,
    0.36268378337836177,
    0.31370664587788705,
    0.22238103445337434,
    0.10122853629037669,
];
