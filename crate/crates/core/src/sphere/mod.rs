//! Zonal solutions of −(p−2)Δu + λu = u^{p−1} on Sᵈ and their branches.

mod branch;
mod zonal;

pub use branch::{
    bifurcation_points, constant_branch, continue_branch, CRITICAL_OFFSET, is_concave, kappa_p, mu_of_lambda, Branch, BranchPoint, MuCurve, Origin,
    StepConfig, Symmetry,
};
pub use zonal::{gegenbauer, zonal_harmonic, residual, ZonalGrid, ZonalProfile};
