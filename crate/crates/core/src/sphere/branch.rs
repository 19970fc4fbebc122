use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::zonal::{gegenbauer, ZonalGrid};
use crate::error::{ensure, Error, Result};
use crate::quadrature::{chebyshev_differentiation, chebyshev_lobatto, clenshaw_curtis_weights};

/// Discretization and stepping controls for branch continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    /// Chebyshev intervals in the Mercator variable.
    pub nodes: usize,
    /// Half-width S of the Mercator window [−S, S].
    pub s_max: f64,
    pub ds0: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub growth: f64,
    pub max_steps: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Relative amplitude of the eigenmode used to leave the constant branch.
    pub amplitude: f64,
    /// Continuation stops once max u / mean u exceeds this.
    pub concentration_limit: f64,
    /// Gauss nodes in z on which profiles are reported.
    pub profile_nodes: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            nodes: 128,
            s_max: 20.0,
            ds0: 0.05,
            ds_min: 1e-10,
            ds_max: 1e6,
            growth: 1.3,
            max_steps: 4000,
            lambda_min: 0.0,
            lambda_max: f64::INFINITY,
            amplitude: 1e-3,
            concentration_limit: 1e12,
            profile_nodes: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    ConstantBranch,
    Bifurcation(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Antipodal,
}

/// One solution on a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub lambda: f64,
    /// ((p−2)‖∇u‖² + λ‖u‖₂²)/‖u‖_p², which equals ‖u‖_p^{p−2} at a solution.
    pub mu: f64,
    /// (p−2)‖∇u‖²/(‖u‖_p² − ‖u‖₂²); equal to λ on the constant branch.
    pub mu_a: f64,
    /// u on the Gauss nodes of the branch's report grid.
    pub profile: Vec<f64>,
    pub arclength: f64,
    /// Negative eigenvalues of the second variation (zonal, in the symmetry class).
    pub jacobian_signature: usize,
    pub is_constant: bool,
    /// ‖residual‖∞ of the accepted Newton iterate over max(1, max|w|^{p−1}),
    /// w the Mercator unknown.
    pub residual: f64,
    pub(crate) raw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub d: u32,
    pub p: f64,
    pub points: Vec<BranchPoint>,
    pub origin: Origin,
    pub symmetry: Symmetry,
    /// Gauss nodes in z shared by every profile.
    pub profile_nodes: Vec<f64>,
    /// Why continuation ended early, if it did.
    pub truncated: Option<String>,
}

const STRETCH: f64 = 3.0;

fn stretch(beta: f64, xi: f64) -> f64 {
    if beta == 0.0 { xi } else { libm::sinh(beta * xi) / libm::sinh(beta) }
}

fn stretch_d(beta: f64, xi: f64) -> f64 {
    if beta == 0.0 { 1.0 } else { beta * libm::cosh(beta * xi) / libm::sinh(beta) }
}

fn stretch_inv(beta: f64, y: f64) -> f64 {
    if beta == 0.0 { y } else { libm::asinh(y * libm::sinh(beta)) / beta }
}

/// Zonal problem in the Mercator variable s = log tan(θ/2), z = −tanh s,
/// unknown w = u·sech^k(s) with k = (d−2)/2. The equation reads
/// −(p−2)w'' + (p−2)k²w + [λ − (p−2)k(k+1)]sech²w = sech^{d−kp}|w|^{p−2}w.
/// Antipodal problems live on [−S, 0] with w' = 0 at the equator; the others
/// on [−S, S]. At ±S the natural condition w' + k·tanh(s)·w = 0 (u' = 0).
pub(crate) struct Mercator {
    d: u32,
    p: f64,
    k: f64,
    half: bool,
    s: Vec<f64>,
    x: Vec<f64>,
    dm: DMatrix<f64>,
    d2: DMatrix<f64>,
    wq: Vec<f64>,
    se2: Vec<f64>,
    snl: Vec<f64>,
    t: Vec<f64>,
    znorm: f64,
    s_max: f64,
    beta: f64,
}

impl Mercator {
    pub(crate) fn new(d: u32, p: f64, n: usize, s_max: f64, half: bool) -> Self {
        let x = chebyshev_lobatto(n);
        let dx = chebyshev_differentiation(n);
        let cc = clenshaw_curtis_weights(n);
        // full window: s = S·sinh(βξ)/sinh β keeps nodes dense near the equator
        // half window: plain affine map, the poles need as many nodes as s = 0
        let (a, b) = if half { (0.5, -0.5) } else { (1.0, 0.0) };
        let beta = if half { 0.0 } else { STRETCH };
        let ds_dx: Vec<f64> = x.iter().map(|v| a * s_max * stretch_d(beta, a * v + b)).collect();
        let s: Vec<f64> = x.iter().map(|v| s_max * stretch(beta, a * v + b)).collect();
        let mut dm = dx;
        for i in 0..=n {
            for j in 0..=n {
                dm[(i, j)] /= ds_dx[i];
            }
        }
        let d2 = &dm * &dm;
        let wq = cc.iter().zip(&ds_dx).map(|(w, j)| w * j).collect();
        let df = d as f64;
        let k = (df - 2.0) / 2.0;
        let sech = |v: f64| 1.0 / libm::cosh(v);
        let se2 = s.iter().map(|v| sech(*v) * sech(*v)).collect();
        let snl = s.iter().map(|v| libm::pow(sech(*v), df - k * p)).collect();
        let t = s.iter().map(|v| libm::tanh(*v)).collect();
        let full = libm::sqrt(core::f64::consts::PI) * libm::tgamma(df / 2.0) / libm::tgamma((df + 1.0) / 2.0);
        let znorm = if half { full / 2.0 } else { full };
        Mercator { d, p, k, half, s, x, dm, d2, wq, se2, snl, t, znorm, s_max, beta }
    }

    fn len(&self) -> usize {
        self.s.len()
    }

    fn residual(&self, w: &[f64], lam: f64) -> Vec<f64> {
        let (p, k) = (self.p, self.k);
        let n = self.len();
        let wv = DVector::from_column_slice(w);
        let w2 = &self.d2 * &wv;
        let w1 = &self.dm * &wv;
        let c1 = (p - 2.0) * k * k;
        let c2 = lam - (p - 2.0) * k * (k + 1.0);
        let mut r: Vec<f64> = (0..n)
            .map(|i| {
                -(p - 2.0) * w2[i] + c1 * w[i] + c2 * self.se2[i] * w[i]
                    - self.snl[i] * libm::pow(libm::fabs(w[i]), p - 2.0) * w[i]
            })
            .collect();
        r[0] = w1[0] + k * self.t[0] * w[0];
        r[n - 1] = if self.half { w1[n - 1] } else { w1[n - 1] + k * self.t[n - 1] * w[n - 1] };
        r
    }

    fn jacobian(&self, w: &[f64], lam: f64) -> DMatrix<f64> {
        let (p, k) = (self.p, self.k);
        let n = self.len();
        let mut a = &self.d2 * (-(p - 2.0));
        let c1 = (p - 2.0) * k * k;
        let c2 = lam - (p - 2.0) * k * (k + 1.0);
        for i in 0..n {
            a[(i, i)] += c1 + c2 * self.se2[i] - (p - 1.0) * self.snl[i] * libm::pow(libm::fabs(w[i]), p - 2.0);
        }
        for j in 0..n {
            a[(0, j)] = self.dm[(0, j)];
            a[(n - 1, j)] = self.dm[(n - 1, j)];
        }
        a[(0, 0)] += k * self.t[0];
        if !self.half {
            a[(n - 1, n - 1)] += k * self.t[n - 1];
        }
        a
    }

    fn d_lambda(&self, w: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut v: Vec<f64> = (0..n).map(|i| self.se2[i] * w[i]).collect();
        v[0] = 0.0;
        v[n - 1] = 0.0;
        v
    }

    /// ‖∇u‖², ‖u‖₂², ‖u‖_p^p against the uniform probability measure.
    fn norms(&self, w: &[f64]) -> (f64, f64, f64) {
        let dw = &self.dm * DVector::from_column_slice(w);
        let (mut g, mut l2, mut lp) = (0.0, 0.0, 0.0);
        for i in 0..self.len() {
            let gi = dw[i] + self.k * self.t[i] * w[i];
            g += self.wq[i] * gi * gi;
            l2 += self.wq[i] * w[i] * w[i] * self.se2[i];
            lp += self.wq[i] * libm::pow(libm::fabs(w[i]), self.p) * self.snl[i];
        }
        (g / self.znorm, l2 / self.znorm, lp / self.znorm)
    }

    /// (μ, μ_a).
    fn quotients(&self, w: &[f64], lam: f64) -> (f64, f64) {
        let (g, l2, lp) = self.norms(w);
        let lp2 = libm::pow(lp, 2.0 / self.p);
        (((self.p - 2.0) * g + lam * l2) / lp2, (self.p - 2.0) * g / (lp2 - l2))
    }

    /// Inertia of the discrete second variation
    /// (p−2)∫(h' + k·tanh·h)² + ∫[λsech² − (p−1)sech^{d−kp}|w|^{p−2}]h².
    fn signature(&self, w: &[f64], lam: f64) -> usize {
        let n = self.len();
        let mut g = self.dm.clone();
        for i in 0..n {
            g[(i, i)] += self.k * self.t[i];
        }
        let mut gw = g.clone();
        for i in 0..n {
            for j in 0..n {
                gw[(i, j)] *= self.wq[i];
            }
        }
        let mut h = g.transpose() * gw * (self.p - 2.0);
        for i in 0..n {
            h[(i, i)] += self.wq[i] * (lam * self.se2[i] - (self.p - 1.0) * self.snl[i] * libm::pow(libm::fabs(w[i]), self.p - 2.0));
        }
        let h = 0.5 * (&h + h.transpose());
        h.symmetric_eigenvalues().iter().filter(|v| **v < 0.0).count()
    }

    fn constant(&self, lam: f64) -> Vec<f64> {
        let c = libm::pow(lam, 1.0 / (self.p - 2.0));
        self.se2.iter().map(|v| c * libm::pow(*v, self.k / 2.0)).collect()
    }

    fn mode(&self, l: u32) -> Vec<f64> {
        let nu = (self.d as f64 - 1.0) / 2.0;
        self.t.iter().map(|t| gegenbauer(l as usize, nu, -t)).collect()
    }

    /// Size of the nonlinear term, max(1, max|w|^{p−1}).
    fn scale(&self, w: &[f64]) -> f64 {
        let wmax = w.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        libm::pow(wmax, self.p - 1.0).max(1.0)
    }

    fn tolerance(&self, w: &[f64]) -> f64 {
        1e-10 * self.scale(w)
    }

    fn inf_norm(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    /// Newton on F(w, λ) = 0 plus row·w + row_l·λ = target.
    fn solve_bordered(&self, mut w: Vec<f64>, mut lam: f64, row: &[f64], row_l: f64, target: f64) -> Option<(Vec<f64>, f64, f64)> {
        let n = self.len();
        for _ in 0..25 {
            let r = self.residual(&w, lam);
            let e = row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + row_l * lam - target;
            let res = Self::inf_norm(&r);
            if !res.is_finite() {
                return None;
            }
            let scale = row.iter().zip(&w).map(|(a, b)| libm::fabs(a * b)).sum::<f64>().max(1.0);
            if res < self.tolerance(&w) && libm::fabs(e) < 1e-12 * scale {
                return Some((w, lam, res));
            }
            let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
            a.view_mut((0, 0), (n, n)).copy_from(&self.jacobian(&w, lam));
            let dl = self.d_lambda(&w);
            for i in 0..n {
                a[(i, n)] = dl[i];
                a[(n, i)] = row[i];
            }
            a[(n, n)] = row_l;
            let mut rhs = DVector::from_iterator(n + 1, r.iter().copied().chain(core::iter::once(e)));
            rhs.neg_mut();
            let dx = a.lu().solve(&rhs)?;
            for i in 0..n {
                w[i] += dx[i];
            }
            lam += dx[n];
        }
        None
    }

    /// Newton on F(w, λ) = 0 at fixed λ.
    fn solve_fixed(&self, mut w: Vec<f64>, lam: f64) -> Option<(Vec<f64>, f64)> {
        for _ in 0..25 {
            let r = self.residual(&w, lam);
            let res = Self::inf_norm(&r);
            if !res.is_finite() {
                return None;
            }
            if res < self.tolerance(&w) {
                return Some((w, res));
            }
            let mut rhs = DVector::from_column_slice(&r);
            rhs.neg_mut();
            let dx = self.jacobian(&w, lam).lu().solve(&rhs)?;
            for (a, b) in w.iter_mut().zip(dx.iter()) {
                *a += b;
            }
        }
        None
    }

    /// u at the peak of w over mean u. The peak of w tracks the core of a
    /// concentrating solution; beyond it w decays to roundoff level and
    /// u = w·cosh^k is not resolved.
    fn concentration(&self, w: &[f64]) -> f64 {
        let mut mean = 0.0;
        let mut peak = (0.0f64, 0usize);
        for i in 0..self.len() {
            let c = libm::pow(libm::cosh(self.s[i]), self.k);
            if libm::fabs(w[i]) > peak.0 {
                peak = (libm::fabs(w[i]), i);
            }
            mean += self.wq[i] * w[i] / c * self.se2[i];
        }
        peak.0 * libm::pow(libm::cosh(self.s[peak.1]), self.k) / (mean / self.znorm)
    }

    fn interpolate(&self, w: &[f64], s: f64) -> f64 {
        let n = self.len() - 1;
        let xi = stretch_inv(self.beta, s / self.s_max);
        let xv = if self.half { 2.0 * xi + 1.0 } else { xi };
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..=n {
            let diff = xv - self.x[j];
            if diff == 0.0 {
                return w[j];
            }
            let mut c = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                c *= 0.5;
            }
            num += c / diff * w[j];
            den += c / diff;
        }
        num / den
    }

    /// u at the given z values.
    fn to_zonal(&self, w: &[f64], z: &[f64]) -> Vec<f64> {
        z.iter()
            .map(|&zv| {
                let mut s = -libm::atanh(zv);
                if self.half {
                    s = -libm::fabs(s);
                }
                let s = s.clamp(-self.s_max, self.s_max);
                self.interpolate(w, s) * libm::pow(libm::cosh(s), self.k)
            })
            .collect()
    }
}

/// Relative offset below 2* used when p = 2* is requested: the critical
/// problem has no compact branch, its constants are read off the limit.
pub const CRITICAL_OFFSET: f64 = 1e-8;

/// Validates (d, p) and returns the exponent actually used, which differs
/// from p only when p = 2*.
fn check_params(d: u32, p: f64) -> Result<f64> {
    ensure!(d >= 2, "sphere dimension must be at least 2, got {d}");
    ensure!(p > 2.0, "branch continuation needs p > 2, got {p}");
    if d >= 3 {
        let crit = 2.0 * d as f64 / (d as f64 - 2.0);
        if libm::fabs(p - crit) <= 1e-12 * crit {
            return Ok(crit * (1.0 - CRITICAL_OFFSET));
        }
        ensure!(p < crit, "p = {p} is not subcritical (2* = {crit})");
    }
    Ok(p)
}

fn check_config(cfg: &StepConfig) -> Result<()> {
    ensure!(cfg.nodes >= 16, "need at least 16 Chebyshev intervals, got {}", cfg.nodes);
    ensure!(cfg.s_max > 1.0 && cfg.s_max <= 300.0, "s_max must lie in (1, 300], got {}", cfg.s_max);
    ensure!(cfg.ds0 > 0.0 && cfg.ds_min > 0.0 && cfg.ds_max >= cfg.ds0 && cfg.growth >= 1.0, "invalid step sizes");
    ensure!(cfg.amplitude > 0.0 && cfg.amplitude < 0.5, "amplitude must lie in (0, 0.5), got {}", cfg.amplitude);
    ensure!(cfg.profile_nodes >= 4, "need at least 4 profile nodes");
    Ok(())
}

pub(crate) struct Step {
    pub w: Vec<f64>,
    pub lam: f64,
    pub arclength: f64,
    pub residual: f64,
    /// tangent and arclength increment used to reach this point from the previous one
    pub tangent: Option<(Vec<f64>, f64, f64)>,
}

/// What the tracer should do after each accepted step.
pub(crate) enum Control {
    Continue,
    Stop,
}

pub(crate) struct Trace {
    pub steps: Vec<Step>,
    pub truncated: Option<String>,
}

fn lambda_of(d: u32, l: u32) -> f64 {
    (l * (l + d - 1)) as f64
}

/// Pseudo-arclength continuation from λ_ℓ along ±(ℓ-th mode).
pub(crate) fn trace(
    m: &Mercator,
    l: u32,
    direction: f64,
    cfg: &StepConfig,
    mut on_step: impl FnMut(&Mercator, &[Step]) -> Control,
) -> Trace {
    let lam_l = lambda_of(m.d, l);
    let base = m.constant(lam_l);
    let phi = m.mode(l);
    let row: Vec<f64> = (0..m.len()).map(|i| m.wq[i] * phi[i] * m.se2[i]).collect();
    let proj = |w: &[f64]| row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
    let amp = direction.signum() * cfg.amplitude;
    let w0: Vec<f64> = base.iter().zip(&phi).map(|(b, f)| b * (1.0 + amp * f)).collect();
    let a0 = proj(&w0);
    let a_base = proj(&base);
    let mut steps = Vec::new();
    let first = m.solve_bordered(w0, lam_l, &row, 0.0, a0);
    let Some((w, lam, res)) = first else {
        return Trace { steps, truncated: Some(String::from("Newton failed at the bifurcation point")) };
    };
    let w1 = w.clone();
    let second = m.solve_bordered(w1, lam, &row, 0.0, 2.0 * a0 - a_base);
    let Some((w1, lam1, res1)) = second else {
        return Trace { steps, truncated: Some(String::from("Newton failed on the second branch point")) };
    };
    steps.push(Step { w, lam, arclength: 0.0, residual: res, tangent: None });
    let s1 = arc_distance(m, &steps[0].w, steps[0].lam, &w1, lam1);
    steps.push(Step { w: w1, lam: lam1, arclength: s1, residual: res1, tangent: None });
    if let Control::Stop = on_step(m, &steps) {
        return Trace { steps, truncated: None };
    }
    let mut ds = cfg.ds0;
    let mut truncated = None;
    loop {
        if steps.len() >= cfg.max_steps {
            truncated = Some(format!("step limit {} reached", cfg.max_steps));
            break;
        }
        let (a, b) = (&steps[steps.len() - 2], &steps[steps.len() - 1]);
        let (tw, tl) = tangent(m, &a.w, a.lam, &b.w, b.lam);
        let row: Vec<f64> = tw.iter().zip(&m.wq).map(|(t, q)| t * q).collect();
        let target = row.iter().zip(&b.w).map(|(r, w)| r * w).sum::<f64>() + tl * b.lam + ds;
        let pred: Vec<f64> = b.w.iter().zip(&tw).map(|(w, t)| w + ds * t).collect();
        match m.solve_bordered(pred, b.lam + ds * tl, &row, tl, target) {
            None => {
                ds /= 2.0;
                if ds < cfg.ds_min {
                    truncated = Some(format!("Newton failure below ds_min at lambda = {}", b.lam));
                    break;
                }
            }
            Some((w, lam, res)) if !aligned(m, &b.w, b.lam, &w, lam, &tw, tl) => {
                let _ = (w, lam, res);
                ds /= 2.0;
                if ds < cfg.ds_min {
                    truncated = Some(format!("step control failed below ds_min at lambda = {}", b.lam));
                    break;
                }
            }
            Some((w, lam, res)) => {
                let arclength = b.arclength + ds;
                steps.push(Step { w, lam, arclength, residual: res, tangent: Some((tw, tl, ds)) });
                ds = (ds * cfg.growth).min(cfg.ds_max);
                if let Control::Stop = on_step(m, &steps) {
                    break;
                }
                let last = &steps[steps.len() - 1];
                if last.lam < cfg.lambda_min || last.lam > cfg.lambda_max {
                    break;
                }
                if m.concentration(&last.w) > cfg.concentration_limit {
                    truncated = Some(format!("concentration limit reached at lambda = {}", last.lam));
                    break;
                }
            }
        }
    }
    Trace { steps, truncated }
}

fn arc_distance(m: &Mercator, wa: &[f64], la: f64, wb: &[f64], lb: f64) -> f64 {
    let s: f64 = (0..m.len()).map(|i| m.wq[i] * (wb[i] - wa[i]) * (wb[i] - wa[i])).sum();
    libm::sqrt(s + (lb - la) * (lb - la))
}

/// The corrected step must stay within ~18° of the predictor direction,
/// otherwise the corrector has probably jumped to another branch.
fn aligned(m: &Mercator, wb: &[f64], lb: f64, w: &[f64], lam: f64, tw: &[f64], tl: f64) -> bool {
    let (sw, sl) = tangent(m, wb, lb, w, lam);
    let c: f64 = (0..m.len()).map(|i| m.wq[i] * sw[i] * tw[i]).sum::<f64>() + sl * tl;
    c > 0.95
}

fn tangent(m: &Mercator, wa: &[f64], la: f64, wb: &[f64], lb: f64) -> (Vec<f64>, f64) {
    let sc = arc_distance(m, wa, la, wb, lb);
    (wa.iter().zip(wb).map(|(a, b)| (b - a) / sc).collect(), (lb - la) / sc)
}

/// Solution at arclength σ past `base` along a stored tangent.
fn point_at(m: &Mercator, base: &Step, tw: &[f64], tl: f64, sigma: f64, guess: &[f64]) -> Option<(Vec<f64>, f64, f64)> {
    let row: Vec<f64> = tw.iter().zip(&m.wq).map(|(t, q)| t * q).collect();
    let target = row.iter().zip(&base.w).map(|(r, w)| r * w).sum::<f64>() + tl * base.lam + sigma;
    let lam_guess = base.lam + sigma * tl;
    m.solve_bordered(guess.to_vec(), lam_guess, &row, tl, target)
}

fn to_point(m: &Mercator, st: &Step, z: &[f64]) -> BranchPoint {
    let (mu, mu_a) = m.quotients(&st.w, st.lam);
    BranchPoint {
        lambda: st.lam,
        mu,
        mu_a,
        profile: m.to_zonal(&st.w, z),
        arclength: st.arclength,
        jacobian_signature: m.signature(&st.w, st.lam),
        is_constant: false,
        residual: st.residual / m.scale(&st.w),
        raw: st.w.clone(),
    }
}

fn report_nodes(d: u32, cfg: &StepConfig) -> Result<Vec<f64>> {
    Ok(ZonalGrid::new(d, cfg.profile_nodes)?.nodes().to_vec())
}

/// Continues the branch bifurcating from the constant solutions at
/// λ_ℓ = ℓ(ℓ+d−1), ℓ ∈ {1, 2}; ℓ = 2 is followed among antipodal solutions.
pub fn continue_branch(l: u32, d: u32, p: f64, direction: f64, cfg: &StepConfig) -> Result<Branch> {
    let p = check_params(d, p)?;
    check_config(cfg)?;
    ensure!(l == 1 || l == 2, "branches are followed from l = 1 or l = 2, got {l}");
    ensure!(direction != 0.0 && direction.is_finite(), "direction must be +1 or -1");
    let half = l == 2;
    let m = Mercator::new(d, p, cfg.nodes, cfg.s_max, half);
    let z = report_nodes(d, cfg)?;
    let tr = trace(&m, l, direction, cfg, |_, _| Control::Continue);
    if tr.steps.is_empty() {
        return Err(Error::NoConvergence(tr.truncated.unwrap_or_default()));
    }
    let points = tr.steps.iter().map(|st| to_point(&m, st, &z)).collect();
    Ok(Branch {
        d,
        p,
        points,
        origin: Origin::Bifurcation(l),
        symmetry: if half { Symmetry::Antipodal } else { Symmetry::None },
        profile_nodes: z,
        truncated: tr.truncated,
    })
}

/// Constant solutions u ≡ λ^{1/(p−2)} at the given λ, with their signatures.
pub fn constant_branch(d: u32, p: f64, lambdas: &[f64], symmetry: Symmetry, cfg: &StepConfig) -> Result<Branch> {
    let p = check_params(d, p)?;
    check_config(cfg)?;
    ensure!(lambdas.iter().all(|l| *l > 0.0 && l.is_finite()), "lambda values must be positive");
    let m = Mercator::new(d, p, cfg.nodes, cfg.s_max, symmetry == Symmetry::Antipodal);
    let z = report_nodes(d, cfg)?;
    let mut arclength = 0.0;
    let mut points = Vec::with_capacity(lambdas.len());
    for (i, &lam) in lambdas.iter().enumerate() {
        if i > 0 {
            arclength += libm::fabs(lam - lambdas[i - 1]);
        }
        let w = m.constant(lam);
        let c = libm::pow(lam, 1.0 / (p - 2.0));
        points.push(BranchPoint {
            lambda: lam,
            mu: lam,
            mu_a: lam,
            profile: vec![c; z.len()],
            arclength,
            jacobian_signature: m.signature(&w, lam),
            is_constant: true,
            residual: Mercator::inf_norm(&m.residual(&w, lam)) / m.scale(&w),
            raw: w,
        });
    }
    Ok(Branch { d, p, points, origin: Origin::ConstantBranch, symmetry, profile_nodes: z, truncated: None })
}

/// λ values in (0, lambda_max] where the constant branch changes Morse index,
/// located by bisection on the discrete signature.
pub fn bifurcation_points(d: u32, p: f64, lambda_max: f64, symmetry: Symmetry, cfg: &StepConfig) -> Result<Vec<f64>> {
    let p = check_params(d, p)?;
    check_config(cfg)?;
    let m = Mercator::new(d, p, cfg.nodes, cfg.s_max, symmetry == Symmetry::Antipodal);
    let sig = |lam: f64| m.signature(&m.constant(lam), lam);
    let n = 400;
    let lo = 1e-3 * lambda_max;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (lambda_max - lo) * i as f64 / n as f64).collect();
    let mut out = Vec::new();
    let mut prev = sig(grid[0]);
    for pair in grid.windows(2) {
        let next = sig(pair[1]);
        if next != prev {
            let (mut a, mut b) = (pair[0], pair[1]);
            while b - a > 1e-12 * b {
                let mid = 0.5 * (a + b);
                if sig(mid) == prev {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
            prev = next;
        }
    }
    Ok(out)
}

/// μ(λ) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MuCurve {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Which branch realized the minimum: None for the constants, Some(ℓ) otherwise.
    pub source: Vec<Option<u32>>,
    /// λ intervals (within the requested grid) no computed branch reached.
    pub gaps: Vec<(f64, f64)>,
    /// Always false: the minimum runs over computed branches only.
    pub certified: bool,
}

/// min over the constant branch and the computed ℓ = 1, 2 branches of the
/// quotient, each branch solved exactly at the grid values of λ.
pub fn mu_of_lambda(d: u32, p: f64, lambda_grid: &[f64], cfg: &StepConfig) -> Result<MuCurve> {
    let p = check_params(d, p)?;
    check_config(cfg)?;
    ensure!(!lambda_grid.is_empty(), "lambda grid is empty");
    ensure!(lambda_grid.iter().all(|l| *l > 0.0 && l.is_finite()), "lambda values must be positive");
    let lmax = lambda_grid.iter().fold(0.0f64, |a, b| a.max(*b));
    let df = d as f64;
    let mut mu: Vec<f64> = lambda_grid.to_vec();
    let mut source = vec![None; lambda_grid.len()];
    let mut covered = vec![false; lambda_grid.len()];
    for l in [1u32, 2] {
        if lambda_of(d, l) >= lmax && l > 1 {
            continue;
        }
        let c = StepConfig { lambda_max: lmax + 1.0, lambda_min: 0.5 * df, ..*cfg };
        let m = Mercator::new(d, p, c.nodes, c.s_max, l == 2);
        let tr = trace(&m, l, 1.0, &c, |_, _| Control::Continue);
        for (i, &lam) in lambda_grid.iter().enumerate() {
            if lam <= df {
                covered[i] = true;
                continue;
            }
            for pair in tr.steps.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                if (a.lam - lam) * (b.lam - lam) > 0.0 {
                    continue;
                }
                let t = if b.lam == a.lam { 0.0 } else { (lam - a.lam) / (b.lam - a.lam) };
                let guess: Vec<f64> = a.w.iter().zip(&b.w).map(|(x, y)| x + t * (y - x)).collect();
                if let Some((w, _)) = m.solve_fixed(guess, lam) {
                    let (q, _) = m.quotients(&w, lam);
                    covered[i] = true;
                    if q < mu[i] {
                        mu[i] = q;
                        source[i] = Some(l);
                    }
                }
            }
        }
    }
    let mut gaps = Vec::new();
    let mut i = 0;
    while i < lambda_grid.len() {
        if !covered[i] {
            let start = lambda_grid[i];
            while i + 1 < lambda_grid.len() && !covered[i + 1] {
                i += 1;
            }
            gaps.push((start, lambda_grid[i]));
        }
        i += 1;
    }
    Ok(MuCurve { lambda: lambda_grid.to_vec(), mu, source, gaps, certified: false })
}

/// Three-point concavity on a (possibly nonuniform) grid: the divided
/// second difference may exceed zero by at most `tol`.
pub fn is_concave(x: &[f64], y: &[f64], tol: f64) -> bool {
    x.windows(3).zip(y.windows(3)).all(|(xs, ys)| {
        let left = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        let right = (ys[2] - ys[1]) / (xs[2] - xs[1]);
        right - left <= tol
    })
}

/// Optimal constant κ_p: the smallest λ on the antipodal branch from λ₂
/// (past its turning point) where μ_a(λ) = λ. p = 1 returns λ₂.
pub fn kappa_p(d: u32, p: f64, cfg: &StepConfig) -> Result<f64> {
    ensure!(d >= 2, "sphere dimension must be at least 2, got {d}");
    let lam2 = lambda_of(d, 2);
    if p == 1.0 {
        return Ok(lam2);
    }
    ensure!(p > 2.0, "kappa_p is computed for p = 1 and 2 < p <= 2*, got {p}");
    let p = check_params(d, p)?;
    check_config(cfg)?;
    let m = Mercator::new(d, p, cfg.nodes, cfg.s_max, true);
    let mut bracket = (f64::INFINITY, f64::NEG_INFINITY);
    for direction in [1.0, -1.0] {
        let mut found: Option<usize> = None;
        let mut prev_g: Option<f64> = None;
        let mut turned = false;
        let tr = trace(&m, 2, direction, cfg, |m, steps| {
            let n = steps.len();
            let st = &steps[n - 1];
            if n >= 3 && (steps[n - 1].lam - steps[n - 2].lam) * (steps[n - 2].lam - steps[n - 3].lam) < 0.0 {
                turned = true;
            }
            let (q, _) = m.quotients(&st.w, st.lam);
            let g = q - st.lam;
            let away = turned || st.lam < lam2 * (1.0 - 1e-2);
            if let Some(pg) = prev_g {
                if away && pg * g < 0.0 {
                    found = Some(n - 1);
                    return Control::Stop;
                }
            }
            prev_g = Some(g);
            Control::Continue
        });
        for st in &tr.steps {
            bracket.0 = bracket.0.min(st.lam);
            bracket.1 = bracket.1.max(st.lam);
        }
        if let Some(i) = found {
            return refine_crossing(&m, &tr.steps, i);
        }
    }
    Err(Error::BranchTruncated { lo: bracket.0, hi: bracket.1 })
}

/// Illinois-type secant in arclength between steps i−1 and i for μ = λ.
fn refine_crossing(m: &Mercator, steps: &[Step], i: usize) -> Result<f64> {
    let base = &steps[i - 1];
    let end = &steps[i];
    let g_of = |w: &[f64], lam: f64| m.quotients(w, lam).0 - lam;
    let Some((tw, tl, ds)) = end.tangent.as_ref() else {
        return Ok(end.lam);
    };
    let (mut a, mut ga) = (0.0, g_of(&base.w, base.lam));
    let (mut b, mut gb) = (*ds, g_of(&end.w, end.lam));
    let mut lam_best = end.lam;
    let mut side = 0i32;
    for _ in 0..60 {
        let c = b - gb * (b - a) / (gb - ga);
        let t = c / ds;
        let guess: Vec<f64> = base.w.iter().zip(&end.w).map(|(x, y)| x + t * (y - x)).collect();
        let Some((w, lam, _)) = point_at(m, base, tw, *tl, c, &guess) else {
            return Err(Error::NoConvergence(format!("crossing refinement failed near lambda = {lam_best}")));
        };
        let gc = g_of(&w, lam);
        lam_best = lam;
        if libm::fabs(gc) < 1e-12 * lam || libm::fabs(b - a) < 1e-14 * ds {
            break;
        }
        if gc * gb < 0.0 {
            a = b;
            ga = gb;
            side = 0;
        } else {
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        b = c;
        gb = gc;
    }
    Ok(lam_best)
}
