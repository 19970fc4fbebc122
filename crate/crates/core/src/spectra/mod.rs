//! Weighted Sturm–Liouville spectra and the κ₀ / κ₁ constants of
//! Ornstein–Uhlenbeck operators.

mod hardy_poincare;
pub(crate) mod ou;
mod zonal;

use alloc::string::String;
use alloc::vec::Vec;

pub use hardy_poincare::{hardy_poincare_spectrum, HpMesh};
pub use ou::{bakry_emery_bound, kappa1_minimize, ou_kappa0, Kappa1Result, OuMesh, Potential};
pub use zonal::{sphere_zonal_spectrum, sphere_zonal_spectrum_even};

/// Output of the eigensolvers.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending, on the finest mesh.
    pub eigenvalues: Vec<f64>,
    /// Imposed orthogonality conditions, one description each.
    pub constraints: Vec<String>,
    pub mesh_size: usize,
    /// Richardson-extrapolated lowest eigenvalue (the gap).
    pub richardson_estimate: f64,
}

impl EigenResult {
    /// Lowest eigenvalue on the finest mesh.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Second-order Richardson extrapolation from meshes h and h/2.
pub(crate) fn richardson(coarse: f64, fine: f64) -> f64 {
    fine + (fine - coarse) / 3.0
}

/// Sturm bisection for the `count` smallest eigenvalues, with the upper
/// bracket found by doubling instead of Gershgorin (which is loose for
/// strongly graded weights).
pub(crate) fn lowest_by_count(counter: &dyn Fn(f64) -> usize, count: usize, lo: f64) -> Vec<f64> {
    let mut hi = 1.0_f64.max(lo.abs());
    while counter(hi) < count && hi < 1e300 {
        hi *= 2.0;
    }
    crate::linalg::bisect_eigenvalues(counter, lo, hi, count)
}
