use alloc::vec::Vec;

use super::fd::Mesh;
use super::{FlowConfig, FlowResult};
use crate::error::{ensure, Error, Result};
use crate::functionals::{relative_pair, sandwich_eps, DiagnosticsRecord};
use crate::linalg::solve_tridiagonal;
use crate::model::{ProblemParams, RadialProfile};

fn barenblatt_nodal(r: &[f64], m: f64) -> Vec<f64> {
    r.iter().map(|r| libm::pow(1.0 + r * r, 1.0 / (m - 1.0))).collect()
}

/// Rescales `v` so that its grid mass equals the grid mass of 𝓑.
pub fn match_barenblatt_mass(v: &RadialProfile, params: &ProblemParams) -> Result<RadialProfile> {
    ensure!((v.dim() - params.n()).abs() < 1e-12, "profile dimension {} differs from n = {}", v.dim(), params.n());
    let b = barenblatt_nodal(v.nodes(), params.m());
    let mv = v.mass();
    ensure!(mv > 0.0, "profile has zero mass");
    let c = v.integrate_nodal(&b) / mv;
    v.with_values(v.values().iter().map(|x| c * x).collect())
}

/// Grid version of A = sup_r r^{α/(1−m)} ∫_{|x|>r} v: the sup over nodes
/// r_i > 0 of r_i^{α/(1−m)} times the lumped mass of nodes j ≥ i.
pub fn tail_constant(v: &RadialProfile, params: &ProblemParams) -> f64 {
    let expo = params.alpha() / (1.0 - params.m());
    let r = v.nodes();
    let w = v.weights();
    let mut tail = 0.0;
    let mut a: f64 = 0.0;
    for i in (1..r.len()).rev() {
        tail += w[i] * v.values()[i];
        a = a.max(libm::pow(r[i], expo) * tail);
    }
    a
}

struct RfdStepper<'a> {
    mesh: &'a Mesh,
    m: f64,
    theta: f64,
    tol: f64,
    max_iter: usize,
}

impl RfdStepper<'_> {
    /// Signed element fluxes c_e v̄_e (ψ_{e+1} − ψ_e), ψ = v^{m−1} − r².
    fn fluxes(&self, v: &[f64]) -> Vec<f64> {
        let r = &self.mesh.r;
        let psi: Vec<f64> = v.iter().zip(r).map(|(x, r)| libm::pow(*x, self.m - 1.0) - r * r).collect();
        self.mesh.c.iter().enumerate().map(|(e, c)| c * 0.5 * (v[e] + v[e + 1]) * (psi[e + 1] - psi[e])).collect()
    }

    /// One step in the unknown y = log v; Newton updates are clipped to |Δy| ≤ 2.
    fn step(&self, v_old: &[f64], dt: f64) -> Result<Vec<f64>> {
        let (m, th) = (self.m, self.theta);
        let mesh = self.mesh;
        let r = &mesh.r;
        let n = v_old.len();
        let fl_old = self.fluxes(v_old);
        let mut y: Vec<f64> = v_old.iter().map(|x| libm::log(*x)).collect();
        let mut last = f64::INFINITY;
        for _ in 0..self.max_iter {
            let v: Vec<f64> = y.iter().map(|x| libm::exp(*x)).collect();
            let psi: Vec<f64> = v.iter().zip(r).map(|(x, r)| libm::pow(*x, m - 1.0) - r * r).collect();
            let dpsi: Vec<f64> = v.iter().map(|x| (m - 1.0) * libm::pow(*x, m - 1.0)).collect();
            let mut res: Vec<f64> = (0..n).map(|i| mesh.mass[i] * (v[i] - v_old[i]) / dt).collect();
            let mut diag: Vec<f64> = (0..n).map(|i| mesh.mass[i] * v[i] / dt).collect();
            let mut lower = Vec::with_capacity(n - 1);
            let mut upper = Vec::with_capacity(n - 1);
            for (e, c) in mesh.c.iter().enumerate() {
                let vb = 0.5 * (v[e] + v[e + 1]);
                let dp = psi[e + 1] - psi[e];
                let fl = th * c * vb * dp + (1.0 - th) * fl_old[e];
                res[e] += fl;
                res[e + 1] -= fl;
                let dl = th * c * (0.5 * v[e] * dp - vb * dpsi[e]);
                let dr = th * c * (0.5 * v[e + 1] * dp + vb * dpsi[e + 1]);
                diag[e] += dl;
                diag[e + 1] -= dr;
                lower.push(-dl);
                upper.push(dr);
            }
            last = res.iter().fold(0.0, |a, x| a.max(libm::fabs(*x)));
            let rhs: Vec<f64> = res.iter().map(|x| -x).collect();
            let dx = solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or(Error::NewtonFailure { iterations: 0, residual: last })?;
            let mut step: f64 = 0.0;
            for (a, b) in y.iter_mut().zip(&dx) {
                let b = b.clamp(-2.0, 2.0);
                step = step.max(libm::fabs(b));
                *a += b;
            }
            if !step.is_finite() {
                break;
            }
            if step < self.tol {
                return Ok(y.iter().map(|x| libm::exp(*x)).collect());
            }
        }
        Err(Error::NewtonFailure { iterations: self.max_iter, residual: last })
    }
}

fn record(v: &[f64], prof: &RadialProfile, params: &ProblemParams, t: f64) -> Result<DiagnosticsRecord> {
    let p = prof.with_values(v.to_vec())?;
    let rp = relative_pair(&p, params)?;
    Ok(DiagnosticsRecord {
        t,
        mass: p.mass(),
        rel_entropy: Some(rp.f),
        fisher_rel: Some(rp.i),
        quotient: rp.q,
        sandwich_eps: Some(sandwich_eps(&p, params.m())),
        ..Default::default()
    })
}

/// Integrates ∂v/∂t + div(v(∇v^{m−1} − 2x)) = 0 from `v0`, which must be
/// positive with the grid mass of 𝓑. Records 𝓕, 𝓘, 𝓠 and the sandwich ε.
pub fn run_rescaled_fp(v0: &RadialProfile, cfg: &FlowConfig) -> Result<FlowResult> {
    cfg.validate()?;
    let params = &cfg.params;
    let (m, n) = (params.m(), params.n());
    ensure!(m < 1.0, "the rescaled flow needs m < 1, got {m}");
    ensure!((v0.dim() - n).abs() < 1e-12, "datum dimension {} differs from n = {n}", v0.dim());
    ensure!(v0.values().iter().all(|x| *x > 0.0 && x.is_finite()), "datum must be positive and finite");
    let base = v0.clone().without_tail();
    let mesh = Mesh::new(base.grid(), n);
    let st = RfdStepper { mesh: &mesh, m, theta: cfg.scheme.theta(), tol: cfg.newton_tol, max_iter: cfg.newton_max_iter };
    let mut v = base.values().to_vec();
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
            v = st.step(&v, cfg.dt)?;
        }
        if cfg.records_at(k, steps) {
            out.records.push(record(&v, &base, params, k as f64 * cfg.dt)?);
        }
    }
    out.final_values = v;
    out.finish(cfg.target_eps);
    Ok(out)
}
