use crate::error::{ensure, Result};
use crate::model::{ProblemParams, RadialProfile};
use crate::special::{power_beta_integral, unit_sphere_area};

/// The optimizer c(1 + r²/σ²)^{−1/(p−1)} sharing mass and second moment of f^{2p}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMatch {
    pub amplitude: f64,
    pub scale: f64,
    /// Coefficient B of r² in 𝗀_f^{1−p} = c^{1−p}(1 + r²/σ²); B = 1 for 𝗀 itself.
    pub b_coeff: f64,
    pub mass: f64,
    pub second_moment: f64,
}

impl BestMatch {
    pub fn value(&self, p: f64, r: f64) -> f64 {
        self.amplitude * libm::pow(1.0 + r * r / (self.scale * self.scale), -1.0 / (p - 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// δ[f] = (p+1)/(p−1)·J − 4B·𝓔[f]; reduces to the usual deficit when B = 1.
    pub deficit: f64,
    pub rel_entropy: f64,
    /// J = ∫|(p−1)∇f + f^p∇𝗀_f^{1−p}|².
    pub fisher_distance: f64,
    /// 4B(p−1)/(p+1)·𝓔[f], the lower bound on J implied by δ ≥ 0.
    pub fisher_bound: f64,
    pub pck_lower: f64,
    pub best_match: BestMatch,
}

/// Deficit, relative entropy, relative Fisher distance and Pinsker bound of a
/// radial f against its moment-matched optimizer.
pub fn gns_stability(f: &RadialProfile, params: &ProblemParams) -> Result<StabilityReport> {
    let p = params.p();
    let d = f.dim();
    ensure!((d - params.df()).abs() < 1e-12, "profile dimension {d} differs from d = {}", params.d());
    ensure!(p > 1.0 && (params.d() < 3 || p < d / (d - 2.0)), "stability needs 1 < p < d/(d-2), got p = {p}");
    let q0 = 2.0 * p / (p - 1.0);
    ensure!(2.0 * q0 > d + 2.0, "second moment of the optimizer diverges for p = {p}");
    let mass = f.moment(2.0 * p, 0.0, 0.0);
    let second = f.moment(2.0 * p, 0.0, 2.0);
    ensure!(mass > 0.0 && second.is_finite() && second > 0.0, "f^(2p) needs positive mass and finite second moment");

    let s = unit_sphere_area(d);
    let k0 = s * power_beta_integral(d - 1.0, 2.0, q0);
    let k2 = s * power_beta_integral(d + 1.0, 2.0, q0);
    let sigma = libm::sqrt(second / mass * k0 / k2);
    let c = libm::pow(mass / (libm::pow(sigma, d) * k0), 1.0 / (2.0 * p));
    let b_coeff = libm::pow(c, 1.0 - p) / (sigma * sigma);
    let best = BestMatch { amplitude: c, scale: sigma, b_coeff, mass, second_moment: second };

    let g_int = |expo: f64| s * libm::pow(c, expo) * libm::pow(sigma, d) * power_beta_integral(d - 1.0, 2.0, expo / (p - 1.0));
    let m = (p + 1.0) / (2.0 * p);
    // pointwise nonnegative integrand; matched moments make the linear part
    // integrate to zero, but keeping it makes the quadrature robust near 𝗀_f
    let ca = libm::pow(c, 1.0 - p);
    let inv_s2 = 1.0 / (sigma * sigma);
    let mut rel = f.integrate_with(|r, u, _| {
        let g = best.value(p, r);
        let g1p = ca * (1.0 + r * r * inv_s2);
        libm::pow(u, p + 1.0) - libm::pow(g, p + 1.0) - m * g1p * (libm::pow(u, 2.0 * p) - libm::pow(g, 2.0 * p))
    });
    let g_tail = crate::model::PowerTail { amplitude: c, scale: sigma, beta: 2.0, q: 1.0 / (p - 1.0) };
    if f.tail().is_some() {
        let rm = f.grid().r_max();
        let gm = |a: f64, e: f64| g_tail.moment(a, 0.0, e, d, rm).unwrap_or(0.0) * s;
        let fm = |a: f64, e: f64| f.tail_moment(a, 0.0, e);
        rel += fm(p + 1.0, 0.0) - gm(p + 1.0, 0.0)
            - m * ca * (fm(2.0 * p, 0.0) - gm(2.0 * p, 0.0) + inv_s2 * (fm(2.0 * p, 2.0) - gm(2.0 * p, 2.0)));
    }
    let rel_entropy = 2.0 * p / (1.0 - p) * rel;

    let fisher = f.integrate_with(|r, u, du| {
        let v = (p - 1.0) * du + libm::pow(u, p) * 2.0 * b_coeff * r;
        v * v
    });
    let deficit = (p + 1.0) / (p - 1.0) * fisher - 4.0 * b_coeff * rel_entropy;

    let mut l1 = f.integrate_with(|r, u, _| libm::fabs(libm::pow(u, 2.0 * p) - libm::pow(best.value(p, r), 2.0 * p)));
    if f.tail().is_some() {
        let rm = f.grid().r_max();
        let gt = g_tail.moment(2.0 * p, 0.0, 0.0, d, rm).unwrap_or(0.0) * s;
        l1 += libm::fabs(f.tail_moment(2.0 * p, 0.0, 0.0) - gt);
    }
    let pck_lower = (p + 1.0) / (8.0 * p) / g_int(3.0 * p - 1.0) * l1 * l1;

    Ok(StabilityReport {
        deficit,
        rel_entropy,
        fisher_distance: fisher,
        fisher_bound: 4.0 * b_coeff * (p - 1.0) / (p + 1.0) * rel_entropy,
        pck_lower,
        best_match: best,
    })
}

/// (lhs, rhs) of (d/(p+1)∫f^{p+1})² ≤ ∫|∇f|² ∫|x|²f^{2p}.
pub fn heisenberg_check(f: &RadialProfile, p: f64) -> Result<(f64, f64)> {
    ensure!(p > 1.0, "p must exceed 1, got {p}");
    let d = f.dim();
    let second = f.moment(2.0 * p, 0.0, 2.0);
    ensure!(second.is_finite(), "second moment of f^(2p) diverges");
    let a = d / (p + 1.0) * f.power_integral(p + 1.0);
    Ok((a * a, f.moment(0.0, 2.0, 0.0) * second))
}
