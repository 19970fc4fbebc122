use alloc::sync::Arc;
use alloc::vec::Vec;

use super::grid::RadialGrid;
use crate::error::{ensure, Error, Result};
use crate::special::{power_beta_integral, power_tail_integral, unit_sphere_area};

/// Algebraic far field u(r) = A (1 + (r/λ)^β)^{−q}, used beyond R_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub amplitude: f64,
    pub scale: f64,
    pub beta: f64,
    pub q: f64,
}

impl PowerTail {
    pub fn value(&self, r: f64) -> f64 {
        self.amplitude * libm::pow(1.0 + libm::pow(r / self.scale, self.beta), -self.q)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let x = libm::pow(r / self.scale, self.beta);
        -self.amplitude * self.q * self.beta / r * x * libm::pow(1.0 + x, -self.q - 1.0)
    }

    /// ∫_R^∞ u^a |u'|^b r^{extra} r^{n−1} dr, without angular factor.
    pub fn moment(&self, a: f64, b: f64, extra: f64, n: f64, r_from: f64) -> Option<f64> {
        let (amp, lam, be, q) = (self.amplitude, self.scale, self.beta, self.q);
        let coef = libm::pow(amp, a) * libm::pow(amp * q * be / lam, b) * libm::pow(lam, extra + n);
        let mu = n - 1.0 + extra + b * (be - 1.0);
        let qq = q * a + b * (q + 1.0);
        if be * qq - mu - 1.0 <= 0.0 {
            return None;
        }
        let rho = r_from / lam;
        if let Some(t) = power_tail_integral(mu, be, qq, rho) {
            return Some(coef * t);
        }
        // full Beta integral minus a composite Gauss head
        let full = power_beta_integral(mu, be, qq);
        let panels = 256;
        let h = rho / panels as f64;
        let mut head = 0.0;
        for k in 0..panels {
            for (x, w) in super::grid::GL8.0.iter().zip(super::grid::GL8.1.iter()) {
                let t = h * (k as f64 + 0.5 * (x + 1.0));
                head += 0.5 * h * w * libm::pow(t, mu) * libm::pow(1.0 + libm::pow(t, be), -qq);
            }
        }
        Some(coef * (full - head))
    }
}

/// Nonnegative radial function sampled on a grid, integrated against
/// |S^{n−1}| r^{n−1} dr.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    dim: f64,
    weights: Arc<Vec<f64>>,
    tail: Option<PowerTail>,
    closed_form: bool,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, dim: f64) -> Result<Self> {
        ensure!(values.len() == grid.len(), "expected {} values, got {}", grid.len(), values.len());
        ensure!(dim.is_finite() && dim >= 1.0, "measure dimension must be >= 1, got {dim}");
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param(alloc::format!(
                "profile value at node {i} (r = {}) is negative or not finite",
                grid.nodes()[i]
            )));
        }
        let weights = Arc::new(grid.weights(dim));
        Ok(RadialProfile { grid, values, dim, weights, tail: None, closed_form: false })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, dim: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values, dim)
    }

    /// Same grid and measure, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        ensure!(values.len() == self.len(), "expected {} values, got {}", self.len(), values.len());
        ensure!(values.iter().all(|v| v.is_finite() && *v >= 0.0), "profile values must be finite and >= 0");
        Ok(RadialProfile { values, tail: None, closed_form: false, ..self.clone() })
    }

    /// Attaches an analytic far field; integrals then include ∫_{R_max}^∞.
    pub fn with_tail(mut self, tail: PowerTail) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn without_tail(mut self) -> Self {
        self.tail = None;
        self.closed_form = false;
        self
    }

    /// Marks the attached tail formula as exact on the whole half line, so
    /// integrals are evaluated from the formula (Gauss points per element)
    /// rather than from nodal values.
    pub fn with_closed_form(mut self, tail: PowerTail) -> Self {
        self.tail = Some(tail);
        self.closed_form = true;
        self
    }

    pub fn is_closed_form(&self) -> bool {
        self.closed_form
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> f64 {
        self.dim
    }

    pub fn tail(&self) -> Option<&PowerTail> {
        self.tail.as_ref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Quadrature weights (angular factor included).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn compatible(&self, other: &RadialProfile) -> bool {
        (Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid) && self.dim == other.dim
    }

    pub fn ensure_compatible(&self, other: &RadialProfile) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Σ wᵢ gᵢ for nodal values g.
    pub fn integrate_nodal(&self, g: &[f64]) -> f64 {
        self.weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }

    /// ∫ u^a |u'|^b r^{extra} over the grid plus the analytic tail if any.
    pub fn moment(&self, a: f64, b: f64, extra: f64) -> f64 {
        if self.closed_form {
            if let Some(t) = self.tail {
                let n = self.dim;
                let head = self.grid.integrate_fn(|r| {
                    let mut g = libm::pow(t.value(r), a) * libm::pow(r, n - 1.0 + extra);
                    if b != 0.0 {
                        g *= libm::pow(libm::fabs(t.derivative(r)), b);
                    }
                    g
                });
                return head * unit_sphere_area(n) + self.tail_moment(a, b, extra);
            }
        }
        let du = if b != 0.0 { Some(self.derivative()) } else { None };
        // r^{extra} goes into the measure so that singular weights at 0 are exact
        let shifted;
        let w: &[f64] = if extra != 0.0 {
            shifted = self.grid.weights_with_power(self.dim, extra);
            &shifted
        } else {
            &self.weights
        };
        let mut s = 0.0;
        for i in 0..self.len() {
            let mut g = libm::pow(self.values[i], a);
            if let Some(du) = &du {
                g *= libm::pow(libm::fabs(du[i]), b);
            }
            s += w[i] * g;
        }
        s + self.tail_moment(a, b, extra)
    }

    /// Tail contribution of [`moment`](Self::moment) (0 without a tail).
    pub fn tail_moment(&self, a: f64, b: f64, extra: f64) -> f64 {
        match &self.tail {
            Some(t) => t
                .moment(a, b, extra, self.dim, self.grid.r_max())
                .map(|v| v * unit_sphere_area(self.dim))
                .unwrap_or(f64::INFINITY),
            None => 0.0,
        }
    }

    /// ∫ u^a.
    pub fn power_integral(&self, a: f64) -> f64 {
        self.moment(a, 0.0, 0.0)
    }

    /// Mass ∫ u.
    pub fn mass(&self) -> f64 {
        self.power_integral(1.0)
    }

    /// ∫ g(r, u, u') over the grid (no tail): Gauss points on the formula for
    /// closed-form profiles, nodal product rule otherwise.
    pub fn integrate_with(&self, g: impl Fn(f64, f64, f64) -> f64) -> f64 {
        if self.closed_form {
            if let Some(t) = self.tail {
                let n = self.dim;
                return unit_sphere_area(n) * self.grid.integrate_fn(|r| g(r, t.value(r), t.derivative(r)) * libm::pow(r, n - 1.0));
            }
        }
        let du = self.derivative();
        let r = self.nodes();
        (0..self.len()).map(|i| self.weights[i] * g(r[i], self.values[i], du[i])).sum()
    }

    /// Σ_e |e| g(ū_e, (u_{i+1} − u_i)/h_e, r̄_e): element-midpoint rule for
    /// integrands involving the gradient.
    pub fn element_sum(&self, g: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let meas = self.grid.element_measures(self.dim);
        let r = self.nodes();
        let u = &self.values;
        (0..self.len() - 1)
            .map(|i| {
                let h = r[i + 1] - r[i];
                meas[i] * g(0.5 * (u[i] + u[i + 1]), (u[i + 1] - u[i]) / h, 0.5 * (r[i] + r[i + 1]))
            })
            .sum()
    }

    /// First derivative at the nodes: three-point stencils, even reflection
    /// at r = 0, one-sided closure at R_max.
    pub fn derivative(&self) -> Vec<f64> {
        derivative(self.nodes(), &self.values)
    }

    pub fn second_derivative(&self) -> Vec<f64> {
        second_derivative(self.nodes(), &self.values)
    }
}

/// Nodal first derivative of `u` on radial nodes (u'(0) = 0 by symmetry).
pub fn derivative(r: &[f64], u: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut d = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        let hm = r[i] - r[i - 1];
        let hp = r[i + 1] - r[i];
        d[i] = -hp / (hm * (hm + hp)) * u[i - 1] + (hp - hm) / (hm * hp) * u[i] + hm / (hp * (hm + hp)) * u[i + 1];
    }
    let (x0, x1, x2) = (r[n - 3], r[n - 2], r[n - 1]);
    d[n - 1] = u[n - 3] * (x2 - x1) / ((x0 - x1) * (x0 - x2))
        + u[n - 2] * (x2 - x0) / ((x1 - x0) * (x1 - x2))
        + u[n - 1] * (2.0 * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1));
    d
}

/// Nodal second derivative, same closures as [`derivative`].
pub fn second_derivative(r: &[f64], u: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut d = alloc::vec![0.0; n];
    d[0] = 2.0 * (u[1] - u[0]) / (r[1] * r[1]);
    for i in 1..n - 1 {
        let hm = r[i] - r[i - 1];
        let hp = r[i + 1] - r[i];
        d[i] = 2.0 * (u[i - 1] / (hm * (hm + hp)) - u[i] / (hm * hp) + u[i + 1] / (hp * (hm + hp)));
    }
    d[n - 1] = d[n - 2];
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_grid;
    use core::f64::consts::PI;

    #[test]
    fn constant_is_exact() {
        let g = Arc::new(make_grid(64, 3.0, 2.0).unwrap());
        let p = RadialProfile::from_fn(g, 3.0, |_| 1.0).unwrap();
        let exact = 4.0 * PI / 3.0 * 27.0;
        assert!((p.mass() / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_raw_radial_integral() {
        let g = make_grid(2048, 8.0, 1.0).unwrap();
        let w = g.radial_weights(1.0);
        let s: f64 = g.nodes().iter().zip(&w).map(|(r, w)| w * (-r * r).exp()).sum();
        assert!((s - PI.sqrt() / 2.0).abs() < 1e-8);
    }

    #[test]
    fn tail_moment_matches_beta_split() {
        // u = (1+r²)^{-5}, n = 3: ∫_0^∞ u r² dr = B(3/2, 7/2)/2
        let t = PowerTail { amplitude: 1.0, scale: 1.0, beta: 2.0, q: 5.0 };
        let full = power_beta_integral(2.0, 2.0, 5.0);
        for r in [0.5, 1.0, 4.0] {
            let tail = t.moment(1.0, 0.0, 0.0, 3.0, r).unwrap();
            let g = make_grid(4000, r, 1.0).unwrap();
            let head = g.integrate_fn(|x| x * x * (1.0 + x * x).powi(-5));
            assert!((head + tail - full).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn derivative_second_order() {
        let g = make_grid(200, 4.0, 1.5).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        let d = derivative(g.nodes(), &u);
        let err = g.nodes().iter().zip(&d).map(|(r, d)| (d + 2.0 * r * (-r * r).exp()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3);
    }
}

/// Signed nodal field on a radial grid (pressures, residuals).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}
