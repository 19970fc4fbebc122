//! Closed-form constants, exponents, regime classifiers and optimal constants
//! evaluated at the explicit optimizers.

use alloc::sync::Arc;
use core::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::model::{aubin_talenti, CknParams, OptimizerFamily, RadialGrid, RadialProfile, SubcriticalCkn};
use crate::special::{gamma, sphere_area};

/// S_d = ¼ d(d−2)|Sᵈ|^{2/d}, the optimal constant in ‖∇f‖₂² ≥ S_d‖f‖_{2*}².
pub fn sobolev_constant(d: u32) -> Result<f64> {
    ensure!(d >= 3, "the Sobolev constant needs d >= 3, got {d}");
    let df = d as f64;
    Ok(0.25 * df * (df - 2.0) * libm::pow(sphere_area(df), 2.0 / df))
}

/// The two other Γ-function forms of S_d, for cross-checking.
pub fn sobolev_constant_alt(d: u32) -> Result<(f64, f64)> {
    ensure!(d >= 3, "the Sobolev constant needs d >= 3, got {d}");
    let df = d as f64;
    let a = PI * df * (df - 2.0) * libm::pow(gamma(df / 2.0) / gamma(df), 2.0 / df);
    let b = 0.25 * df * (df - 2.0) * libm::pow(2.0, 2.0 / df) * libm::pow(PI, 1.0 + 1.0 / df)
        / libm::pow(gamma((df + 1.0) / 2.0), 2.0 / df);
    Ok((a, b))
}

/// Exponents attached to the interpolation inequalities on Sᵈ and ℝᵈ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereExponents {
    /// Bakry–Emery exponent 2^#, +∞ when d = 1.
    pub two_sharp: f64,
    /// γ(p); for d = 1 the limiting value (p − 1)/3.
    pub gamma_p: f64,
    /// Scaling exponent θ of the Gagliardo–Nirenberg–Sobolev inequality.
    pub theta: f64,
}

pub fn sphere_exponents(d: u32, p: f64) -> Result<SphereExponents> {
    ensure!(d >= 1, "dimension must be at least 1");
    ensure!(p >= 1.0 && p.is_finite(), "p must be >= 1, got {p}");
    let df = d as f64;
    let (two_sharp, gamma_p) = if d == 1 {
        (f64::INFINITY, (p - 1.0) / 3.0)
    } else {
        let ts = (2.0 * df * df + 1.0) / ((df - 1.0) * (df - 1.0));
        let c = (df - 1.0) / (df + 2.0);
        (ts, c * c * (p - 1.0) * (ts - p))
    };
    let theta = gns_theta(d, p);
    Ok(SphereExponents { two_sharp, gamma_p, theta })
}

/// θ = d(p − 1)/((d + 2 − p(d − 2))p).
pub fn gns_theta(d: u32, p: f64) -> f64 {
    let df = d as f64;
    df * (p - 1.0) / ((df + 2.0 - p * (df - 2.0)) * p)
}

/// δ(β) for the nonlinear flow on the sphere, β = 2/(2 − p(1 − m)),
/// κ = β(p − 2) + 1.
pub fn sphere_delta(d: u32, p: f64, m: f64) -> Result<f64> {
    ensure!(d >= 1, "dimension must be at least 1");
    let den = 2.0 - p * (1.0 - m);
    ensure!(den.abs() > 1e-14, "2 - p(1 - m) vanishes for p = {p}, m = {m}");
    let beta = 2.0 / den;
    let kappa = beta * (p - 2.0) + 1.0;
    let df = d as f64;
    let s = kappa + beta - 1.0;
    let c = (df - 1.0) / (df + 2.0) * s;
    Ok(-c * c + kappa * (beta - 1.0) + df / (df + 2.0) * s)
}

/// Outcome of a symmetry classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Symmetry,
    SymmetryBreaking,
    Inadmissible,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Symmetry => "symmetry",
            Region::SymmetryBreaking => "symmetry_breaking",
            Region::Inadmissible => "inadmissible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeVerdict {
    pub region: Region,
    /// Felli–Schneider threshold (b_FS(a) or β_FS(γ)).
    pub boundary_value: f64,
    /// Signed distance to the threshold, ≥ 0 on the symmetric side.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CknFamily {
    Critical(CknParams),
    Subcritical(SubcriticalCkn),
}

/// b_FS(a) = d(a_c − a)/(2√((a_c − a)² + d − 1)) + a − a_c.
pub fn b_fs(d: u32, a: f64) -> f64 {
    let df = d as f64;
    let ac = (df - 2.0) / 2.0;
    let x = ac - a;
    df * x / (2.0 * libm::sqrt(x * x + df - 1.0)) + a - ac
}

/// β_FS(γ) = d − 2 − √((γ − d)² − 4(d − 1)); when the radicand is negative
/// the square root is taken as 0 (every admissible β is then symmetric).
pub fn beta_fs(d: u32, gamma_w: f64) -> f64 {
    let df = d as f64;
    let rad = (gamma_w - df) * (gamma_w - df) - 4.0 * (df - 1.0);
    df - 2.0 - libm::sqrt(rad.max(0.0))
}

pub fn felli_schneider(family: CknFamily) -> RegimeVerdict {
    match family {
        CknFamily::Critical(c) => {
            let bound = b_fs(c.d, c.a);
            let margin = c.b - bound;
            let region = if !c.is_admissible() {
                Region::Inadmissible
            } else if margin >= 0.0 {
                Region::Symmetry
            } else {
                Region::SymmetryBreaking
            };
            RegimeVerdict { region, boundary_value: bound, margin }
        }
        CknFamily::Subcritical(s) => {
            let df = s.d as f64;
            let rad = (s.gamma - df) * (s.gamma - df) - 4.0 * (df - 1.0);
            let bound = beta_fs(s.d, s.gamma);
            let margin = bound - s.beta;
            let region = if !s.is_admissible() || s.d < 2 {
                Region::Inadmissible
            } else if rad < 0.0 || margin >= 0.0 {
                Region::Symmetry
            } else {
                Region::SymmetryBreaking
            };
            RegimeVerdict { region, boundary_value: bound, margin }
        }
    }
}

/// α_FS = √((d − 1)/(n − 1)).
pub fn alpha_fs(d: u32, n: f64) -> Result<f64> {
    ensure!(d >= 2, "alpha_FS needs d >= 2, got {d}");
    ensure!(n > 1.0, "alpha_FS needs n > 1, got {n}");
    if n.is_infinite() {
        return Ok(0.0);
    }
    Ok(libm::sqrt((d as f64 - 1.0) / (n - 1.0)))
}

/// Symmetry test in the (α, n) variables: symmetric iff α ≤ α_FS.
pub fn symmetric_by_alpha(c: &CknParams) -> Result<bool> {
    ensure!(c.is_admissible(), "inadmissible CKN parameters {c:?}");
    let afs = alpha_fs(c.d, c.n())?;
    let alpha = if c.p() <= 2.0 { 0.0 } else { c.alpha() };
    Ok(alpha <= afs)
}

/// Grid used to evaluate quotients at explicit optimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub n_nodes: usize,
    pub r_max: f64,
    pub r_core: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { n_nodes: 800, r_max: 400.0, r_core: 0.5 }
    }
}

impl QuadratureConfig {
    pub fn grid(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::log_graded(self.n_nodes, self.r_max, self.r_core)?))
    }
}

/// Gagliardo–Nirenberg–Sobolev quotient ‖∇f‖₂^θ‖f‖_{p+1}^{1−θ}/‖f‖_{2p}.
pub fn gns_quotient(f: &RadialProfile, p: f64) -> f64 {
    let d = libm::round(f.dim()) as u32;
    let theta = gns_theta(d, p);
    let grad = f.moment(0.0, 2.0, 0.0);
    let lp1 = f.power_integral(p + 1.0);
    let l2p = f.power_integral(2.0 * p);
    libm::pow(grad, theta / 2.0) * libm::pow(lp1, (1.0 - theta) / (p + 1.0)) / libm::pow(l2p, 1.0 / (2.0 * p))
}

fn check_gns_p(d: u32, p: f64) -> Result<()> {
    ensure!(d >= 1, "dimension must be at least 1");
    ensure!(p > 1.0 && p.is_finite(), "GNS exponent must be > 1, got {p}");
    if d >= 3 {
        let ps = d as f64 / (d as f64 - 2.0);
        ensure!(p <= ps + 1e-12, "GNS exponent must be <= d/(d-2) = {ps}, got {p}");
    }
    Ok(())
}

/// C_GNS(p), the quotient evaluated at the optimizer (1 + r²)^{−1/(p−1)}.
pub fn gns_optimal_constant(d: u32, p: f64) -> Result<f64> {
    gns_optimal_constant_with(d, p, QuadratureConfig::default())
}

pub fn gns_optimal_constant_with(d: u32, p: f64, cfg: QuadratureConfig) -> Result<f64> {
    check_gns_p(d, p)?;
    let g = aubin_talenti(cfg.grid()?, OptimizerFamily::Gns { d, p })?;
    Ok(gns_quotient(&g, p))
}

/// (∫|f|^p r^{−bp})^{2/p} / ∫|∇f|² r^{−2a}: the ratio whose supremum is C_{a,b}.
pub fn ckn_quotient(f: &RadialProfile, c: &CknParams) -> f64 {
    let p = c.p();
    let num = f.moment(p, 0.0, -c.b * p);
    let den = f.moment(0.0, 2.0, -2.0 * c.a);
    libm::pow(num, 2.0 / p) / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CknConstant {
    /// Transcription of the typeset closed form; not trusted.
    pub formula_value: f64,
    pub formula_reliable: bool,
    /// Quotient at the radial optimizer; authoritative.
    pub quadrature_value: f64,
}

pub fn ckn_symmetric_constant(c: &CknParams) -> Result<CknConstant> {
    ckn_symmetric_constant_with(c, QuadratureConfig::default())
}

pub fn ckn_symmetric_constant_with(c: &CknParams, cfg: QuadratureConfig) -> Result<CknConstant> {
    ensure!(c.is_admissible(), "inadmissible CKN parameters {c:?}");
    let v = felli_schneider(CknFamily::Critical(*c));
    ensure!(
        v.region == Region::Symmetry,
        "({}, {}) lies in the symmetry-breaking region (b_FS = {}); no radial optimizer",
        c.a,
        c.b,
        v.boundary_value
    );
    ensure!(c.p() > 2.0, "b = a + 1 gives p = 2; the radial optimizer degenerates");
    let g = aubin_talenti(cfg.grid()?, OptimizerFamily::Ckn(*c))?;
    Ok(CknConstant {
        formula_value: ckn_formula_transcription(c),
        formula_reliable: false,
        quadrature_value: ckn_quotient(&g, c),
    })
}

/// Best-effort reading of the typeset C_{a,b}:
/// (2/p)(a_c − a)^{−(p+2)/p} ((p−2)Γ((3p−2)/(2(p−2))) / (2√π |S^{d−1}| Γ(p/(p−2))))^{(p−2)/p}.
pub fn ckn_formula_transcription(c: &CknParams) -> f64 {
    let p = c.p();
    let df = c.d as f64;
    let s = crate::special::unit_sphere_area(df);
    let inner = (p - 2.0) * gamma((3.0 * p - 2.0) / (2.0 * (p - 2.0))) / (2.0 * libm::sqrt(PI) * s * gamma(p / (p - 2.0)));
    2.0 / p * libm::pow(c.a_c() - c.a, -(p + 2.0) / p) * libm::pow(inner, (p - 2.0) / p)
}

/// C₀ of the Rényi entropy growth estimate, with p = 1/(2m − 1).
pub fn renyi_growth_c0(d: u32, m: f64, mass: f64) -> Result<f64> {
    ensure!(m > 0.5 && m < 1.0, "C0 needs m in (1/2, 1), got {m}");
    ensure!(mass > 0.0, "mass must be positive");
    let df = d as f64;
    ensure!(m >= (df - 1.0) / df, "m = {m} below m1 for d = {d}");
    let p = 1.0 / (2.0 * m - 1.0);
    let cg = gns_optimal_constant(d, p)?;
    Ok(renyi_growth_c0_from(d, m, mass, cg))
}

/// C₀ given a precomputed C_GNS(p).
pub fn renyi_growth_c0_from(d: u32, m: f64, mass: f64, c_gns: f64) -> f64 {
    let df = d as f64;
    let e = (df + 2.0) * m - df;
    4.0 * libm::pow(1.0 - m, 3.0) / ((2.0 * m - 1.0) * (2.0 * m - 1.0))
        * libm::pow(c_gns, 2.0 / df * e / ((1.0 - m) * (2.0 * m - 1.0)))
        * libm::pow(mass, e / (df * (1.0 - m)))
}

/// Numerical constants of the threshold time that the source leaves implicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConstants {
    pub c_star: f64,
    pub a_exp: f64,
    pub eps0: f64,
    pub chi: f64,
}

impl Default for ThresholdConstants {
    fn default() -> Self {
        ThresholdConstants { c_star: 1.0, a_exp: 1.0, eps0: 0.5, chi: 0.5 }
    }
}

/// Admissible window (0, min(χη, ε₀)) for ε, η = 2d(m − m₁).
pub fn threshold_eps_window(d: u32, m: f64, cfg: &ThresholdConstants) -> f64 {
    let df = d as f64;
    let eta = 2.0 * df * (m - (df - 1.0) / df);
    (cfg.chi * eta).min(cfg.eps0)
}

/// T★ = (1/(2α)) log(1 + α c★ (1 + A^{1−m} + G^{α/2}) / ε^{a}), α = d(m − m_c).
pub fn threshold_time(d: u32, m: f64, a_tail: f64, g: f64, eps: f64, cfg: &ThresholdConstants) -> Result<f64> {
    ensure!(d >= 1 && m < 1.0, "invalid (d, m) = ({d}, {m})");
    ensure!(a_tail >= 0.0 && g >= 0.0, "A and G must be nonnegative");
    let hi = threshold_eps_window(d, m, cfg);
    ensure!(eps > 0.0 && eps < hi, "eps = {eps} outside its window (0, {hi})");
    let df = d as f64;
    let alpha = df * (m - (df - 2.0) / df);
    ensure!(alpha > 0.0, "alpha = d(m - mc) must be positive");
    let inner = 1.0 + libm::pow(a_tail, 1.0 - m) + libm::pow(g, alpha / 2.0);
    Ok(libm::log1p(alpha * cfg.c_star * inner / libm::pow(eps, cfg.a_exp)) / (2.0 * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sobolev_values() {
        let s3 = sobolev_constant(3).unwrap();
        assert!((s3 - 3.0 * libm::pow(PI / 2.0, 4.0 / 3.0)).abs() < 1e-12);
        assert!((s3 - 5.47790).abs() < 1e-5);
        let s4 = sobolev_constant(4).unwrap();
        assert!((s4 - 2.0 * libm::sqrt(8.0 * PI * PI / 3.0)).abs() < 1e-12);
        for d in 3..=12 {
            let s = sobolev_constant(d).unwrap();
            let (a, b) = sobolev_constant_alt(d).unwrap();
            assert!((a / s - 1.0).abs() < 1e-12 && (b / s - 1.0).abs() < 1e-12, "d = {d}");
        }
        assert!(sobolev_constant(2).is_err());
    }

    #[test]
    fn exponents() {
        let e = sphere_exponents(2, 3.0).unwrap();
        assert_eq!(e.two_sharp, 9.0);
        for d in 2..8 {
            let ts = sphere_exponents(d, 1.5).unwrap().two_sharp;
            assert!(sphere_exponents(d, ts).unwrap().gamma_p.abs() < 1e-12);
            assert_eq!(sphere_exponents(d, 1.0).unwrap().gamma_p, 0.0);
        }
        for d in 3..9 {
            let ps = d as f64 / (d as f64 - 2.0);
            assert!((sphere_exponents(d, ps).unwrap().theta - 1.0).abs() < 1e-14);
        }
        assert!(sphere_exponents(1, 3.0).unwrap().two_sharp.is_infinite());
    }

    #[test]
    fn felli_schneider_values() {
        assert!((b_fs(3, -1.0) + 0.40859).abs() < 1e-5);
        let v = felli_schneider(CknFamily::Critical(CknParams::new(3, -0.5, 0.0).unwrap()));
        assert_eq!(v.region, Region::Symmetry);
        assert!((v.boundary_value + 0.13397).abs() < 1e-5);
        let c = CknParams::new(3, -0.5, 0.0).unwrap();
        assert!((c.alpha() - 0.5).abs() < 1e-14);
        assert!((alpha_fs(3, c.n()).unwrap() - libm::sqrt(0.4)).abs() < 1e-14);
    }

    #[test]
    fn alpha_fs_values() {
        assert!((alpha_fs(3, 4.0).unwrap() - libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(alpha_fs(5, 5.0).unwrap(), 1.0);
        assert!((alpha_fs(2, 10.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(alpha_fs(3, 1.0).is_err());
    }

    #[test]
    fn threshold_time_example() {
        let cfg = ThresholdConstants::default();
        let t = threshold_time(3, 0.8, 1.0, 1.0, 0.1, &cfg).unwrap();
        assert!((t - libm::log(43.0) / 2.8).abs() < 1e-12);
        assert!((t - 1.34329).abs() < 1e-5);
        assert!(threshold_time(3, 0.8, 1.0, 1.0, 0.45, &cfg).is_err());
        let tiny = ThresholdConstants { c_star: 1e-14, ..cfg };
        assert!(threshold_time(3, 0.8, 1.0, 1.0, 0.1, &tiny).unwrap() < 1e-12);
    }
}
