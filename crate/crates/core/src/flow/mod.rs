//! Implicit time stepping of fast diffusion, its self-similar Fokker–Planck
//! form and the linear heat and Ornstein–Uhlenbeck flows, with diagnostics
//! recorded along the way.
//!
//! All nonlinear schemes are lumped P1 finite elements on a radial grid with
//! no-flux conditions at both ends, so the discrete mass is conserved to
//! roundoff.

mod checks;
mod fd;
mod linear;
mod rfd;

use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::functionals::DiagnosticsRecord;
use crate::model::ProblemParams;

pub use checks::{
    growth_entropy_bound, growth_entropy_check, initial_time_layer_bound, initial_time_layer_check,
    quotient_ode_check, verify_identity_f, GrowthCheck, GrowthReading, IdentityCheck, QuotientOde,
};
pub use fd::{run_free_fd, self_similar_datum};
pub use linear::{run_linear, LinearKind, LinearMesh};
pub use rfd::{match_barenblatt_mass, run_rescaled_fp, tail_constant};

/// Time discretization. `Theta(1.0)` is implicit Euler, `Theta(0.5)`
/// Crank–Nicolson.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    ImplicitEuler,
    Theta(f64),
}

impl Scheme {
    pub fn theta(&self) -> f64 {
        match *self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::Theta(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub params: ProblemParams,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Record diagnostics every this many steps (the last step is always recorded).
    pub record_every: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Target ε for the empirical threshold time.
    pub target_eps: Option<f64>,
}

impl FlowConfig {
    pub fn new(params: ProblemParams, dt: f64, t_end: f64) -> Self {
        FlowConfig {
            params,
            scheme: Scheme::ImplicitEuler,
            dt,
            t_end,
            record_every: 1,
            newton_tol: 1e-12,
            newton_max_iter: 60,
            target_eps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.dt > 0.0 && self.dt.is_finite(), "dt must be positive, got {}", self.dt);
        ensure!(self.t_end > 0.0 && self.t_end.is_finite(), "t_end must be positive, got {}", self.t_end);
        ensure!(self.record_every >= 1, "record_every must be at least 1");
        ensure!(self.newton_tol > 0.0 && self.newton_tol < 1e-6, "newton_tol must lie in (0, 1e-6), got {}", self.newton_tol);
        ensure!(self.newton_max_iter >= 1, "newton_max_iter must be at least 1");
        let th = self.scheme.theta();
        ensure!((0.5..=1.0).contains(&th), "theta must lie in [1/2, 1], got {th}");
        if let Some(e) = self.target_eps {
            ensure!(e > 0.0, "target eps must be positive, got {e}");
        }
        Ok(())
    }

    pub(crate) fn steps(&self) -> usize {
        libm::ceil(self.t_end / self.dt - 1e-9) as usize
    }

    pub(crate) fn records_at(&self, k: usize, steps: usize) -> bool {
        k % self.record_every == 0 || k == steps
    }
}

/// Least-squares rates over the final third of the run; `None` when the
/// quantity is not recorded or not positive there.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FittedRates {
    /// −d log 𝓕/dt (relative flows) or −d log of the entropy (OU).
    pub entropy_decay: Option<f64>,
    /// −d log 𝓘/dt.
    pub fisher_decay: Option<f64>,
    /// −d log(variance)/dt for the OU flow.
    pub variance_decay: Option<f64>,
    /// d log ‖u‖₂² / d log t for the heat flow.
    pub power_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub records: Vec<DiagnosticsRecord>,
    /// First recorded t with sandwich ε at or below the configured target.
    pub empirical_t_star: Option<f64>,
    pub fitted_rates: FittedRates,
    /// Radial reduction of the right-hand side of the Rényi identity over 𝖨,
    /// one value per record (free flow only).
    pub identity_rhs: Vec<f64>,
    /// Number of nodal values raised to the 1e−300 floor.
    pub clipped: usize,
    pub final_values: Vec<f64>,
}

impl FlowResult {
    pub fn mass_drift(&self) -> f64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) if a.mass != 0.0 => libm::fabs(b.mass / a.mass - 1.0),
            _ => 0.0,
        }
    }

    pub(crate) fn finish(&mut self, target: Option<f64>) {
        if let Some(eps) = target {
            self.empirical_t_star = self.records.iter().find(|r| r.sandwich_eps.is_some_and(|e| e <= eps)).map(|r| r.t);
        }
        let pick = |f: fn(&DiagnosticsRecord) -> Option<f64>| -> Vec<(f64, f64)> {
            let t_last = self.records.last().map_or(0.0, |r| r.t);
            self.records
                .iter()
                .filter(|r| r.t >= 2.0 * t_last / 3.0)
                .filter_map(|r| f(r).filter(|v| *v > 0.0 && v.is_finite()).map(|v| (r.t, libm::log(v))))
                .collect()
        };
        let decay = |pts: Vec<(f64, f64)>| slope(&pts).map(|s| -s);
        self.fitted_rates.entropy_decay = decay(pick(|r| r.rel_entropy));
        self.fitted_rates.fisher_decay = decay(pick(|r| r.fisher_rel));
    }
}

/// Least-squares slope of y against x; needs at least three points.
pub(crate) fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
