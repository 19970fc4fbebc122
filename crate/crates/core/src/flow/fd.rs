use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{FlowConfig, FlowResult};
use crate::error::{ensure, Error, Result};
use crate::functionals::free_diagnostics;
use crate::linalg::solve_tridiagonal;
use crate::model::{derivative, second_derivative, ProblemParams, RadialGrid, RadialProfile};

pub(crate) const FLOOR: f64 = 1e-300;

/// Self-similar fast diffusion solution at t = 1,
/// (1 + k r²)^{1/(m−1)} with k = (1 − m)β/(2m), β = 1/(n(m−1) + 2).
pub fn self_similar_datum(params: &ProblemParams, grid: Arc<RadialGrid>) -> Result<RadialProfile> {
    let (m, n) = (params.m(), params.n());
    ensure!(m < 1.0 && n * (m - 1.0) + 2.0 > 0.0, "no self-similar solution for m = {m}, n = {n}");
    let beta = 1.0 / (n * (m - 1.0) + 2.0);
    let k = (1.0 - m) * beta / (2.0 * m);
    RadialProfile::from_fn(grid, n, |r| libm::pow(1.0 + k * r * r, 1.0 / (m - 1.0)))
}

/// Lumped weights and element couplings meas_e/h_e² of a radial P1 mesh.
pub(crate) struct Mesh {
    pub r: Vec<f64>,
    pub mass: Vec<f64>,
    pub c: Vec<f64>,
}

impl Mesh {
    pub fn new(grid: &RadialGrid, n: f64) -> Self {
        let r = grid.nodes().to_vec();
        let meas = grid.element_measures(n);
        let c = meas.iter().zip(r.windows(2)).map(|(m, w)| m / ((w[1] - w[0]) * (w[1] - w[0]))).collect();
        Mesh { mass: grid.weights(n), c, r }
    }

    /// Discrete −Δ applied to `w`, no-flux at both ends.
    pub fn stiffness(&self, w: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; w.len()];
        for (e, c) in self.c.iter().enumerate() {
            let fl = c * (w[e + 1] - w[e]);
            y[e] -= fl;
            y[e + 1] += fl;
        }
        y
    }
}

struct FdStepper<'a> {
    mesh: &'a Mesh,
    m: f64,
    theta: f64,
    tol: f64,
    max_iter: usize,
    clipped: usize,
}

impl FdStepper<'_> {
    /// One step in the unknown w = u^m.
    fn step(&mut self, u_old: &[f64], dt: f64) -> Result<Vec<f64>> {
        let (m, th) = (self.m, self.theta);
        let mesh = self.mesh;
        let n = u_old.len();
        let w_old: Vec<f64> = u_old.iter().map(|u| libm::pow(*u, m)).collect();
        let k_old = mesh.stiffness(&w_old);
        let scale = u_old.iter().zip(&mesh.mass).map(|(u, w)| u * w).fold(0.0, f64::max) / dt;
        let mut w = w_old.clone();
        let mut last = f64::INFINITY;
        for _ in 0..self.max_iter {
            let u: Vec<f64> = w.iter().map(|x| libm::pow(*x, 1.0 / m)).collect();
            let kw = mesh.stiffness(&w);
            let res: Vec<f64> = (0..n)
                .map(|i| mesh.mass[i] * (u[i] - u_old[i]) / dt + th * kw[i] + (1.0 - th) * k_old[i])
                .collect();
            last = res.iter().fold(0.0, |a, x| a.max(libm::fabs(*x)));
            let mut diag: Vec<f64> = (0..n).map(|i| mesh.mass[i] / dt / m * libm::pow(w[i], 1.0 / m - 1.0)).collect();
            for (e, c) in mesh.c.iter().enumerate() {
                diag[e] += th * c;
                diag[e + 1] += th * c;
            }
            let off: Vec<f64> = mesh.c.iter().map(|c| -th * c).collect();
            let rhs: Vec<f64> = res.iter().map(|x| -x).collect();
            let dx = solve_tridiagonal(&off, &diag, &off, &rhs).ok_or(Error::NewtonFailure { iterations: 0, residual: last })?;
            let mut t = 1.0;
            while w.iter().zip(&dx).any(|(a, b)| a + t * b <= 0.0) && t > 1e-12 {
                t *= 0.5;
            }
            let wmax = w.iter().fold(0.0, |a: f64, x| a.max(*x));
            for (a, b) in w.iter_mut().zip(&dx) {
                *a += t * b;
            }
            let step = dx.iter().fold(0.0, |a: f64, x| a.max(libm::fabs(*x))) * t;
            if last <= self.tol * scale && step <= self.tol * wmax {
                return Ok(self.clip(w));
            }
        }
        Err(Error::NewtonFailure { iterations: self.max_iter, residual: last / scale })
    }

    fn clip(&mut self, w: Vec<f64>) -> Vec<f64> {
        w.into_iter()
            .map(|x| {
                let u = libm::pow(x.max(0.0), 1.0 / self.m);
                if u < FLOOR {
                    self.clipped += 1;
                    FLOOR
                } else {
                    u
                }
            })
            .collect()
    }
}

/// RHS/𝖨 of −½ d/dt log 𝖦 = RHS/𝖨, where
/// RHS = ∫u^m (n−1)/n (P'' − P'/r)² + (m − m₁)∫u^m (ΔP + 𝖨/𝖤)², P = m/(m−1) u^{m−1}.
fn identity_rhs(mesh: &Mesh, u: &[f64], m: f64, n: f64, e: f64, i: f64) -> f64 {
    let r = &mesh.r;
    let p: Vec<f64> = u.iter().map(|x| m / (m - 1.0) * libm::pow(*x, m - 1.0)).collect();
    let p1 = derivative(r, &p);
    let p2 = second_derivative(r, &p);
    let m1 = (n - 1.0) / n;
    let mut s = 0.0;
    for k in 0..u.len() {
        let pr = if r[k] > 0.0 { p1[k] / r[k] } else { p2[k] };
        let um = libm::pow(u[k], m);
        let a = p2[k] - pr;
        let lap = p2[k] + (n - 1.0) * pr + i / e;
        s += mesh.mass[k] * um * ((n - 1.0) / n * a * a + (m - m1) * lap * lap);
    }
    s / i
}

/// Integrates ∂u/∂t = r^{1−n}(r^{n−1}(u^m)')' from `u0`, recording 𝖤, 𝖨, 𝖦
/// and the identity right-hand side.
pub fn run_free_fd(u0: &RadialProfile, cfg: &FlowConfig) -> Result<FlowResult> {
    cfg.validate()?;
    let params = &cfg.params;
    let (m, n) = (params.m(), params.n());
    ensure!((u0.dim() - n).abs() < 1e-12, "datum dimension {} differs from n = {n}", u0.dim());
    ensure!(u0.values().iter().all(|x| *x >= 0.0 && x.is_finite()), "datum must be finite and nonnegative");
    ensure!(u0.mass() > 0.0, "datum has zero mass");
    let grid = u0.grid().clone();
    let mesh = Mesh::new(&grid, n);
    let mut st = FdStepper { mesh: &mesh, m, theta: cfg.scheme.theta(), tol: cfg.newton_tol, max_iter: cfg.newton_max_iter, clipped: 0 };
    let mut u: Vec<f64> = u0.values().to_vec();
    for x in u.iter_mut() {
        if *x < FLOOR {
            *x = FLOOR;
            st.clipped += 1;
        }
    }
    let mut out = FlowResult {
        records: Vec::new(),
        empirical_t_star: None,
        fitted_rates: Default::default(),
        identity_rhs: Vec::new(),
        clipped: 0,
        final_values: Vec::new(),
    };
    let steps = cfg.steps();
    for k in 0..=steps {
        if k > 0 {
            u = st.step(&u, cfg.dt)?;
        }
        if cfg.records_at(k, steps) {
            let prof = RadialProfile::new(grid.clone(), u.clone(), n)?;
            let mut rec = free_diagnostics(&prof, params)?;
            rec.t = k as f64 * cfg.dt;
            let (e, i) = (rec.entropy.unwrap_or(0.0), rec.fisher_free.unwrap_or(0.0));
            out.identity_rhs.push(if i > 0.0 { identity_rhs(&mesh, &u, m, n, e, i) } else { 0.0 });
            out.records.push(rec);
        }
    }
    out.clipped = st.clipped;
    out.final_values = u;
    out.finish(None);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stiffness_annihilates_constants() {
        let g = RadialGrid::log_graded(40, 10.0, 0.1).unwrap();
        let mesh = Mesh::new(&g, 3.0);
        let y = mesh.stiffness(&[2.5; 40]);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        let lin: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        assert!(mesh.stiffness(&lin).iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn mass_is_conserved() {
        let p = ProblemParams::new(3, 0.8).unwrap();
        let g = Arc::new(RadialGrid::log_graded(200, 40.0, 0.05).unwrap());
        let u0 = RadialProfile::from_fn(g, 3.0, |r| libm::pow(1.0 + r * r, -5.0) * (1.0 + libm::exp(-r * r))).unwrap();
        let run = run_free_fd(&u0, &FlowConfig::new(p, 1e-2, 0.2)).unwrap();
        assert!(run.mass_drift() < 1e-12);
        assert_eq!(run.records.len(), 21);
        assert_eq!(run.clipped, 0);
    }
}
