use crate::error::{ensure, Result};

/// Dimension and exponents of a fast diffusion / interpolation problem.
///
/// All derived exponents are computed here and nowhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    d: u32,
    n: f64,
    m: f64,
    mass: Option<f64>,
}

impl ProblemParams {
    /// Fast diffusion parameters: m ∈ [m₁, 1), and m > 1/2 when d ≤ 2.
    pub fn new(d: u32, m: f64) -> Result<Self> {
        ensure!(d >= 1, "dimension must be at least 1, got {d}");
        ensure!(m.is_finite() && m < 1.0, "m must be below 1, got {m}");
        let m1 = (d as f64 - 1.0) / d as f64;
        ensure!(m >= m1, "m = {m} is below m1 = {m1} for d = {d}");
        ensure!(m > 0.5, "m must exceed 1/2 (so that p = 1/(2m-1) is finite), got {m}");
        Ok(ProblemParams { d, n: d as f64, m, mass: None })
    }

    /// Parameters from the interpolation exponent, m = (p+1)/(2p).
    pub fn from_p(d: u32, p: f64) -> Result<Self> {
        ensure!(p > 1.0 && p.is_finite(), "p must be a finite number above 1, got {p}");
        Self::new(d, (p + 1.0) / (2.0 * p))
    }

    /// Artificial dimension n ≥ d used by the radial reduction.
    pub fn with_dimension(mut self, n: f64) -> Result<Self> {
        ensure!(n.is_finite() && n >= self.d as f64, "artificial dimension n = {n} must be >= d = {}", self.d);
        self.n = n;
        Ok(self)
    }

    pub fn with_mass(mut self, mass: f64) -> Result<Self> {
        ensure!(mass > 0.0 && mass.is_finite(), "mass must be positive, got {mass}");
        self.mass = Some(mass);
        Ok(self)
    }

    /// Same parameters without a prescribed mass.
    pub fn with_mass_unset(&self) -> Self {
        ProblemParams { mass: None, ..*self }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn df(&self) -> f64 {
        self.d as f64
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mass(&self) -> Option<f64> {
        self.mass
    }

    /// p = 1/(2m − 1).
    pub fn p(&self) -> f64 {
        1.0 / (2.0 * self.m - 1.0)
    }

    pub fn m1(&self) -> f64 {
        (self.df() - 1.0) / self.df()
    }

    pub fn mc(&self) -> f64 {
        (self.df() - 2.0) / self.df()
    }

    /// m₁ and m_c of the (possibly artificial) dimension n.
    pub fn m1_n(&self) -> f64 {
        (self.n - 1.0) / self.n
    }

    pub fn mc_n(&self) -> f64 {
        (self.n - 2.0) / self.n
    }

    /// p★ = d/(d − 2), for d ≥ 3.
    pub fn p_star(&self) -> Option<f64> {
        (self.d >= 3).then(|| self.df() / (self.df() - 2.0))
    }

    /// Sobolev exponent 2* = 2d/(d − 2), for d ≥ 3.
    pub fn two_star(&self) -> Option<f64> {
        (self.d >= 3).then(|| 2.0 * self.df() / (self.df() - 2.0))
    }

    /// Decay exponent of the relative flow, α = 2 − d(1 − m) in dimension n.
    pub fn alpha(&self) -> f64 {
        2.0 - self.n * (1.0 - self.m)
    }
}

/// Critical Caffarelli–Kohn–Nirenberg weights (a, b) and derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CknParams {
    pub d: u32,
    pub a: f64,
    pub b: f64,
}

impl CknParams {
    pub fn new(d: u32, a: f64, b: f64) -> Result<Self> {
        let c = CknParams { d, a, b };
        ensure!(c.is_admissible(), "inadmissible CKN parameters d = {d}, a = {a}, b = {b}");
        Ok(c)
    }

    /// Admissibility of (a, b) for the critical inequality.
    pub fn is_admissible(&self) -> bool {
        let (a, b) = (self.a, self.b);
        if !(a.is_finite() && b.is_finite()) || self.d == 0 || a >= self.a_c() || b > a + 1.0 {
            return false;
        }
        match self.d {
            1 => b > a + 0.5,
            2 => b > a,
            _ => b >= a,
        }
    }

    pub fn a_c(&self) -> f64 {
        (self.d as f64 - 2.0) / 2.0
    }

    /// p = 2d/(d − 2 + 2(b − a)).
    pub fn p(&self) -> f64 {
        let d = self.d as f64;
        2.0 * d / (d - 2.0 + 2.0 * (self.b - self.a))
    }

    pub fn alpha(&self) -> f64 {
        let ac = self.a_c();
        (1.0 + self.a - self.b) * (ac - self.a) / (ac - self.a + self.b)
    }

    /// n = 2p/(p − 2); infinite when b = a + 1.
    pub fn n(&self) -> f64 {
        let p = self.p();
        if p <= 2.0 {
            f64::INFINITY
        } else {
            2.0 * p / (p - 2.0)
        }
    }

    /// Exponent (p − 2)(a_c − a) of the radial optimizer.
    pub fn optimizer_exponent(&self) -> f64 {
        (self.p() - 2.0) * (self.a_c() - self.a)
    }
}

/// Subcritical weighted family (β, γ, p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcriticalCkn {
    pub d: u32,
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
}

impl SubcriticalCkn {
    pub fn new(d: u32, beta: f64, gamma: f64, p: f64) -> Result<Self> {
        let s = SubcriticalCkn { d, beta, gamma, p };
        ensure!(s.is_admissible(), "inadmissible subcritical parameters d = {d}, beta = {beta}, gamma = {gamma}, p = {p}");
        Ok(s)
    }

    pub fn p_star(&self) -> f64 {
        let d = self.d as f64;
        (d - self.gamma) / (d - self.beta - 2.0)
    }

    pub fn is_admissible(&self) -> bool {
        let d = self.d as f64;
        let (b, g) = (self.beta, self.gamma);
        g < d && g - 2.0 < b && b < (d - 2.0) * g / d && self.p > 1.0 && self.p <= self.p_star() + 1e-15
    }

    pub fn theta(&self) -> f64 {
        let d = self.d as f64;
        let (b, g, p) = (self.beta, self.gamma, self.p);
        (d - g) * (p - 1.0) / (p * (d + b + 2.0 - 2.0 * g - p * (d - b - 2.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_exponents() {
        let p = ProblemParams::new(3, 0.8).unwrap();
        assert!((p.m1() - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.mc() - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.p() - 1.0 / 0.6).abs() < 1e-14);
        assert_eq!(p.p_star(), Some(3.0));
        assert!((p.alpha() - 1.4).abs() < 1e-14);
        let q = ProblemParams::from_p(3, p.p()).unwrap();
        assert!((q.m() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ProblemParams::new(3, 0.6).is_err());
        assert!(ProblemParams::new(1, 0.5).is_err());
        assert!(ProblemParams::new(2, 1.0).is_err());
        assert!(ProblemParams::new(3, 0.8).unwrap().with_dimension(2.5).is_err());
    }

    #[test]
    fn weightless_reduction() {
        let c = CknParams::new(3, 0.0, 0.0).unwrap();
        assert!((c.alpha() - 1.0).abs() < 1e-15);
        assert!((c.n() - 3.0).abs() < 1e-14);
        assert!((c.p() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn ckn_admissibility_by_dimension() {
        assert!(CknParams::new(2, -0.5, -0.5).is_err());
        assert!(CknParams::new(1, -1.0, -0.4).is_ok());
        assert!(CknParams::new(1, -1.0, -0.5).is_err());
        assert!(CknParams::new(3, 0.6, 0.6).is_err());
    }
}
