//! Special functions.
//!
//! Γ and log Γ come from `libm` (musl's Lanczos approximation, relative error
//! a few ulp on the positive axis). Everything else is built from them.

use core::f64::consts::PI;

#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Euler's Beta function for positive arguments.
pub fn beta(a: f64, b: f64) -> f64 {
    libm::exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

/// Area of the unit sphere S^{n−1} ⊂ ℝⁿ, for real n > 0.
pub fn unit_sphere_area(n: f64) -> f64 {
    2.0 * libm::pow(PI, 0.5 * n) / gamma(0.5 * n)
}

/// |Sᵈ|, the area of the d-dimensional unit sphere in ℝ^{d+1}.
pub fn sphere_area(d: f64) -> f64 {
    unit_sphere_area(d + 1.0)
}

/// ∫₀^∞ r^{μ} (1 + r^β)^{−q} dr = B((μ+1)/β, q − (μ+1)/β)/β.
pub fn power_beta_integral(mu: f64, beta_exp: f64, q: f64) -> f64 {
    let s = (mu + 1.0) / beta_exp;
    beta(s, q - s) / beta_exp
}

/// Tail integral ∫_R^∞ r^{μ} (1 + r^β)^{−q} dr for R > 1, by the binomial
/// series of (1 + r^{−β})^{−q}. Returns `None` when R^{−β} is too close to 1
/// for the series to converge in reasonable time, or the tail diverges.
pub fn power_tail_integral(mu: f64, beta_exp: f64, q: f64, r: f64) -> Option<f64> {
    if !(r > 1.0) || beta_exp <= 0.0 || beta_exp * q - mu - 1.0 <= 0.0 {
        return None;
    }
    let x = libm::pow(r, -beta_exp);
    if x > 0.95 {
        return None;
    }
    let lead = libm::pow(r, mu + 1.0 - beta_exp * q);
    // coefficient binom(−q, j) x^j, updated recursively
    let mut coeff = 1.0;
    let mut sum = 0.0;
    for j in 0..20000 {
        let jf = j as f64;
        let term = coeff / (beta_exp * (q + jf) - mu - 1.0);
        sum += term;
        if libm::fabs(term) < 1e-17 * libm::fabs(sum) && j > 2 {
            return Some(lead * sum);
        }
        coeff *= -(q + jf) / (jf + 1.0) * x;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(4.5) / (3.5 * 2.5 * 1.5 * 0.5 * PI.sqrt()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(3.0) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(2.0) - 2.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(1.0) - 2.0).abs() < 1e-14);
        assert!((sphere_area(3.0) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn tail_matches_full_integral_split() {
        // ∫₀^∞ r² (1+r²)^{-3} dr = π/16
        let full = power_beta_integral(2.0, 2.0, 3.0);
        assert!((full - PI / 16.0).abs() < 1e-14);
        let r = 3.0;
        let tail = power_tail_integral(2.0, 2.0, 3.0, r).unwrap();
        // closed form antiderivative of r²/(1+r²)³
        let f = |x: f64| {
            (x.atan() / 8.0) + x * (x * x - 1.0) / (8.0 * (1.0 + x * x) * (1.0 + x * x))
        };
        let head = f(r) - f(0.0);
        assert!((head + tail - full).abs() < 1e-14, "{} {}", head + tail, full);
    }
}
