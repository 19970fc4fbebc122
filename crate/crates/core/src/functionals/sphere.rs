use crate::constants::sphere_exponents;
use crate::error::{ensure, Result};
use crate::sphere::ZonalProfile;

/// LHS − RHS of the improved interpolation inequality on Sᵈ:
/// ‖∇f‖² − d/(2−p−γ)(‖f‖₂² − ‖f‖_p^{2−2γ/(2−p)} ‖f‖₂^{2γ/(2−p)}).
pub fn sphere_improved_deficit(f: &ZonalProfile, p: f64) -> Result<f64> {
    let d = f.grid.d();
    let ex = sphere_exponents(d, p)?;
    ensure!(
        (1.0..2.0).contains(&p) || (p > 2.0 && p < ex.two_sharp),
        "p = {p} outside [1,2) U (2, 2#) with 2# = {}",
        ex.two_sharp
    );
    let g = ex.gamma_p;
    ensure!(
        (g - (2.0 - p)).abs() > 1e-12,
        "gamma(p) = 2 - p at p = {p}: only the logarithmic variant applies, which is not implemented"
    );
    let df = d as f64;
    let n2 = f.norm(2.0);
    let np = f.norm(p);
    let e = 2.0 * g / (2.0 - p);
    let rhs = df / (2.0 - p - g) * (n2 * n2 - libm::pow(np, 2.0 - e) * libm::pow(n2, e));
    Ok(f.dirichlet() - rhs)
}

/// LHS − RHS of ‖∇f‖² ≥ d/(p−2)(‖f‖_p² − ‖f‖₂²), p ≠ 2.
pub fn sphere_gns_deficit(f: &ZonalProfile, p: f64) -> Result<f64> {
    ensure!(p >= 1.0 && (p - 2.0).abs() > 1e-14, "p must be >= 1 and different from 2, got {p}");
    let df = f.grid.d() as f64;
    let n2 = f.norm(2.0);
    let np = f.norm(p);
    Ok(f.dirichlet() - df / (p - 2.0) * (np * np - n2 * n2))
}
