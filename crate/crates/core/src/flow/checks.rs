use alloc::format;
use alloc::vec::Vec;

use super::FlowResult;
use crate::constants::renyi_growth_c0;
use crate::error::{ensure, Error, Result};
use crate::model::ProblemParams;

/// Left side −½ d log 𝖦/dt and right side RHS/𝖨 of the Rényi identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// max |lhs − rhs| / max |rhs| over the compared records.
    pub max_relative: f64,
    pub max_lhs: f64,
    pub max_rhs: f64,
    pub points: usize,
}

fn uniform_times(run: &FlowResult) -> Result<f64> {
    let t: Vec<f64> = run.records.iter().map(|r| r.t).collect();
    ensure!(t.len() >= 5, "need at least 5 records, got {}", t.len());
    let h = t[1] - t[0];
    ensure!(
        t.windows(2).all(|w| libm::fabs(w[1] - w[0] - h) <= 1e-9 * h),
        "records are not equally spaced in time"
    );
    Ok(h)
}

/// Compares −½ d log 𝖦/dt, by central differences of the records, with the
/// recorded identity right-hand side. The first tenth of the records is
/// skipped.
pub fn verify_identity_f(run: &FlowResult) -> Result<IdentityCheck> {
    ensure!(run.identity_rhs.len() == run.records.len(), "run carries no identity data; use a free fast diffusion run");
    let h = uniform_times(run)?;
    let lg: Vec<f64> = run.records.iter().map(|r| r.renyi_power.map_or(f64::NAN, libm::log)).collect();
    ensure!(lg.iter().chain(&run.identity_rhs).all(|v| v.is_finite()), "non-smooth records: G or the identity is not finite");
    let k0 = (lg.len() / 10).max(1);
    let (mut err, mut lmax, mut rmax) = (0.0f64, 0.0f64, 0.0f64);
    for k in k0..lg.len() - 1 {
        let lhs = -0.5 * (lg[k + 1] - lg[k - 1]) / (2.0 * h);
        let rhs = run.identity_rhs[k];
        err = err.max(libm::fabs(lhs - rhs));
        lmax = lmax.max(libm::fabs(lhs));
        rmax = rmax.max(libm::fabs(rhs));
    }
    let max_relative = if rmax > 0.0 { err / rmax } else { err };
    Ok(IdentityCheck { max_relative, max_lhs: lmax, max_rhs: rmax, points: lg.len() - 1 - k0 })
}

/// 4 + 4η e^{−4T}/(4 + η − η e^{−4T}).
pub fn initial_time_layer_bound(eta: f64, t: f64) -> f64 {
    let e = libm::exp(-4.0 * t);
    4.0 + 4.0 * eta * e / (4.0 + eta - eta * e)
}

/// True when 𝓠(t) ≥ bound − 1e−3 at every record with t ≤ T. Inconclusive
/// unless the recorded 𝓠 at T is at least 4 + η.
pub fn initial_time_layer_check(run: &FlowResult, t: f64, eta: f64) -> Result<bool> {
    ensure!(eta > 0.0 && t >= 0.0, "need eta > 0 and T >= 0");
    let at = run
        .records
        .iter()
        .filter(|r| r.quotient.is_some())
        .min_by(|a, b| libm::fabs(a.t - t).total_cmp(&libm::fabs(b.t - t)))
        .ok_or_else(|| Error::Inconclusive("no quotient recorded".into()))?;
    let q_t = at.quotient.unwrap_or(0.0);
    if q_t < 4.0 + eta {
        return Err(Error::Inconclusive(format!("Q(T) = {q_t} below 4 + eta = {}", 4.0 + eta)));
    }
    let bound = initial_time_layer_bound(eta, t);
    Ok(run.records.iter().filter(|r| r.t <= t).all(|r| r.quotient.is_none_or(|q| q >= bound - 1e-3)))
}

/// Finite-difference 𝓠' compared with 𝓠(𝓠 − 4) on records off the final
/// plateau (|𝓠 − 𝓠_end| > 5% of 𝓠_end).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientOde {
    /// max |𝓠' − 𝓠(𝓠−4)| / |𝓠(𝓠−4)|.
    pub max_relative_error: f64,
    /// max of 𝓠' − 𝓠(𝓠−4) relative to |𝓠(𝓠−4)|; nonpositive when the
    /// inequality 𝓠' ≤ 𝓠(𝓠−4) holds.
    pub max_excess: f64,
    pub points: usize,
}

pub fn quotient_ode_check(run: &FlowResult) -> Result<QuotientOde> {
    let h = uniform_times(run)?;
    let q: Vec<f64> = run.records.iter().map(|r| r.quotient.unwrap_or(f64::NAN)).collect();
    let q_end = *q.last().unwrap_or(&f64::NAN);
    ensure!(q_end.is_finite(), "quotient undefined at the end of the run");
    let (mut err, mut exc, mut pts) = (0.0f64, f64::NEG_INFINITY, 0);
    for k in 1..q.len() - 1 {
        if !(q[k - 1].is_finite() && q[k].is_finite() && q[k + 1].is_finite()) {
            continue;
        }
        if libm::fabs(q[k] - q_end) <= 0.05 * q_end {
            continue;
        }
        let dq = (q[k + 1] - q[k - 1]) / (2.0 * h);
        let target = q[k] * (q[k] - 4.0);
        let scale = libm::fabs(target).max(1e-12);
        err = err.max(libm::fabs(dq - target) / scale);
        exc = exc.max((dq - target) / scale);
        pts += 1;
    }
    if pts == 0 {
        return Err(Error::Inconclusive("no records away from the plateau of Q".into()));
    }
    Ok(QuotientOde { max_relative_error: err, max_excess: exc, points: pts })
}

/// Readings of the lower bound on ∫u^m(t) along fast diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthReading {
    /// (𝖤₀ + (1−m)C₀t/(m−m_c))^{(1−m)/(m−m_c)}.
    AsPrinted,
    /// (𝖤₀^{(m−m_c)/(1−m)} + (1−m)C₀t/(m−m_c))^{(1−m)/(m−m_c)}, equal to 𝖤₀ at t = 0.
    Homogeneous,
}

pub fn growth_entropy_bound(reading: GrowthReading, params: &ProblemParams, e0: f64, c0: f64, t: f64) -> f64 {
    let (m, d) = (params.m(), params.df());
    let mc = (d - 2.0) / d;
    let outer = (1.0 - m) / (m - mc);
    let base = match reading {
        GrowthReading::AsPrinted => e0,
        GrowthReading::Homogeneous => libm::pow(e0, 1.0 / outer),
    };
    libm::pow(base + (1.0 - m) * c0 * t / (m - mc), outer)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCheck {
    pub c0: f64,
    /// min over records of 𝖤(t)/bound(t) − 1; nonnegative when the bound holds.
    pub min_margin: f64,
    /// Same quantity excluding t = 0.
    pub min_margin_positive_t: f64,
}

/// Evaluates a growth reading along a free run, with C₀ from the optimal
/// GNS constant and the run's mass.
pub fn growth_entropy_check(run: &FlowResult, params: &ProblemParams, reading: GrowthReading) -> Result<GrowthCheck> {
    let first = run.records.first().ok_or_else(|| Error::param("empty run"))?;
    let e0 = first.entropy.ok_or_else(|| Error::param("run records no entropy"))?;
    let c0 = renyi_growth_c0(params.d(), params.m(), first.mass)?;
    let (mut all, mut pos) = (f64::INFINITY, f64::INFINITY);
    for r in &run.records {
        let e = r.entropy.unwrap_or(f64::NAN);
        let margin = e / growth_entropy_bound(reading, params, e0, c0, r.t) - 1.0;
        all = all.min(margin);
        if r.t > 0.0 {
            pos = pos.min(margin);
        }
    }
    Ok(GrowthCheck { c0, min_margin: all, min_margin_positive_t: pos })
}
