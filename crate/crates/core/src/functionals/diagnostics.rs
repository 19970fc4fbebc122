use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::model::{barenblatt, PowerTail, ProblemParams, RadialProfile};

/// One row of flow diagnostics; entries not produced by a given flow are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    /// 𝖤 = ∫u^m (linear flows: ∫w log(w/M) dμ).
    pub entropy: Option<f64>,
    /// 𝓕[v] (linear flows: the variance or ‖u‖₂²).
    pub rel_entropy: Option<f64>,
    /// 𝖨 = ∫u|∇𝖯|².
    pub fisher_free: Option<f64>,
    /// 𝓘[v] = ∫v|∇v^{m−1} − 2x|².
    pub fisher_rel: Option<f64>,
    /// 𝓠 = 𝓘/𝓕.
    pub quotient: Option<f64>,
    /// 𝖦 = 𝖨·𝖤^{2(m−m₁)/(1−m)}.
    pub renyi_power: Option<f64>,
    pub sandwich_eps: Option<f64>,
}

/// 𝖤, 𝖨 and 𝖦 of a fast diffusion profile. The Rényi exponent uses m₁ of the
/// measure dimension n (equal to d unless an artificial dimension is set).
pub fn free_diagnostics(u: &RadialProfile, params: &ProblemParams) -> Result<DiagnosticsRecord> {
    let m = params.m();
    ensure!(m > 0.5 && m < 1.0, "free diagnostics need m in (1/2, 1), got {m}");
    let e = u.power_integral(m);
    let i = fisher_free(u, m);
    let m1 = (u.dim() - 1.0) / u.dim();
    let expo = 2.0 * (m - m1) / (1.0 - m);
    let g = if expo == 0.0 { i } else { i * libm::pow(e, expo) };
    Ok(DiagnosticsRecord {
        mass: u.mass(),
        entropy: Some(e),
        fisher_free: Some(i),
        renyi_power: Some(g),
        ..Default::default()
    })
}

/// ∫u|∂_r𝖯|² = (m/(m−½))² ∫|∂_r u^{m−½}|², element differences of u^{m−½}.
pub(crate) fn fisher_free(u: &RadialProfile, m: f64) -> f64 {
    if u.is_closed_form() {
        return m * m * u.moment(2.0 * m - 3.0, 2.0, 0.0);
    }
    let w: Vec<f64> = u.values().iter().map(|v| libm::pow(*v, m - 0.5)).collect();
    let meas = u.grid().element_measures(u.dim());
    let r = u.nodes();
    let mut s = 0.0;
    for k in 0..w.len() - 1 {
        let dw = (w[k + 1] - w[k]) / (r[k + 1] - r[k]);
        s += meas[k] * dw * dw;
    }
    let c = m / (m - 0.5);
    c * c * s + m * m * u.tail_moment(2.0 * m - 3.0, 2.0, 0.0)
}

/// Relative entropy, relative Fisher information and their quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePair {
    pub f: f64,
    pub i: f64,
    pub q: Option<f64>,
}

fn barenblatt_tail(m: f64) -> PowerTail {
    PowerTail { amplitude: 1.0, scale: 1.0, beta: 2.0, q: 1.0 / (1.0 - m) }
}

/// Mass of 𝓑 in the convention of `v`: over ℝⁿ when v carries a tail,
/// over the grid otherwise.
fn reference_mass(v: &RadialProfile, params: &ProblemParams) -> Result<f64> {
    let p = params.with_mass_unset();
    let b = barenblatt(&p, v.grid().clone())?;
    Ok(if v.tail().is_some() { b.mass() } else { v.integrate_nodal(b.values()) })
}

/// 𝓕[v] = ∫(𝓑^{m−1}(v−𝓑) − (v^m−𝓑^m)/m) and 𝓘[v] = ∫v|∂_r v^{m−1} − 2r|².
pub fn relative_pair(v: &RadialProfile, params: &ProblemParams) -> Result<RelativePair> {
    let m = params.m();
    ensure!((v.dim() - params.n()).abs() < 1e-12, "profile dimension {} differs from n = {}", v.dim(), params.n());
    ensure!(v.values().iter().all(|x| *x > 0.0), "relative functionals need a positive profile");
    let mb = reference_mass(v, params)?;
    let mv = v.mass();
    if ((mv - mb) / mb).abs() > 1e-8 {
        return Err(Error::param(alloc::format!("mass mismatch: int v = {mv}, int B = {mb}")));
    }
    let bexp = 1.0 / (m - 1.0);
    let bar = |r: f64| libm::pow(1.0 + r * r, bexp);
    let f_density = |r: f64, x: f64| {
        let b = bar(r);
        (1.0 + r * r) * (x - b) - (libm::pow(x, m) - libm::pow(b, m)) / m
    };
    let (mut f, mut i);
    if v.is_closed_form() {
        f = v.integrate_with(|r, x, _| f_density(r, x));
        i = v.integrate_with(|r, x, dx| {
            let g = (m - 1.0) * libm::pow(x, m - 2.0) * dx - 2.0 * r;
            x * g * g
        });
    } else {
        let r = v.nodes();
        let dens: Vec<f64> = r.iter().zip(v.values()).map(|(r, x)| f_density(*r, *x)).collect();
        f = v.integrate_nodal(&dens);
        let psi: Vec<f64> = r.iter().zip(v.values()).map(|(r, x)| libm::pow(*x, m - 1.0) - r * r).collect();
        let meas = v.grid().element_measures(v.dim());
        i = 0.0;
        for k in 0..psi.len() - 1 {
            let g = (psi[k + 1] - psi[k]) / (r[k + 1] - r[k]);
            i += meas[k] * 0.5 * (v.values()[k] + v.values()[k + 1]) * g * g;
        }
    }
    if v.tail().is_some() {
        // tail contributions, written as monomial moments of v and 𝓑
        let bt = barenblatt_tail(m);
        let n = v.dim();
        let rm = v.grid().r_max();
        let s = crate::special::unit_sphere_area(n);
        let bm = |a: f64, b: f64, e: f64| bt.moment(a, b, e, n, rm).unwrap_or(0.0) * s;
        let vm = |a: f64, b: f64, e: f64| v.tail_moment(a, b, e);
        f += vm(1.0, 0.0, 0.0) + vm(1.0, 0.0, 2.0) - bm(1.0, 0.0, 0.0) - bm(1.0, 0.0, 2.0) - (vm(m, 0.0, 0.0) - bm(m, 0.0, 0.0)) / m;
        i += (m - 1.0) * (m - 1.0) * vm(2.0 * m - 3.0, 2.0, 0.0) + 4.0 * (m - 1.0) * vm(m - 1.0, 1.0, 1.0) + 4.0 * vm(1.0, 0.0, 2.0);
    }
    let f = f.max(0.0);
    let i = i.max(0.0);
    let q = (f > 1e-13 * mv).then(|| i / f);
    Ok(RelativePair { f, i, q })
}

/// inf{ε : (1−ε)𝓑 ≤ v ≤ (1+ε)𝓑} over nodes where 𝓑 > 1e−12.
pub fn sandwich_eps(v: &RadialProfile, m: f64) -> f64 {
    let bexp = 1.0 / (m - 1.0);
    v.nodes()
        .iter()
        .zip(v.values())
        .filter_map(|(r, x)| {
            let b = libm::pow(1.0 + r * r, bexp);
            (b > 1e-12).then(|| libm::fabs(x / b - 1.0))
        })
        .fold(0.0, f64::max)
}
