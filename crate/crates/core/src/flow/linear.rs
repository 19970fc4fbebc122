use alloc::vec::Vec;

use super::fd::Mesh;
use super::{slope, FlowConfig, FlowResult};
use crate::error::{ensure, Error, Result};
use crate::functionals::DiagnosticsRecord;
use crate::linalg::solve_tridiagonal;
use crate::model::make_grid;
use crate::spectra::ou::{support, OuSystem};
use crate::spectra::Potential;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearKind {
    /// ∂u/∂t = Δu for radial data in dimension `dim`.
    Heat { dim: f64 },
    /// ∂w/∂t = w'' − φ'w' on the line.
    Ou(Potential),
}

/// `cells` mesh cells; `extent` is the outer radius for the heat flow and the
/// depth φ − min φ bounding the interval for the OU flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMesh {
    pub cells: usize,
    pub extent: f64,
}

/// Steps M ẇ = −K w for a symmetric tridiagonal K given by face couplings.
fn theta_step(mass: &[f64], face: &[f64], w: &[f64], dt: f64, th: f64) -> Result<Vec<f64>> {
    let n = w.len();
    let mut rhs: Vec<f64> = (0..n).map(|i| mass[i] * w[i] / dt).collect();
    let mut diag: Vec<f64> = (0..n).map(|i| mass[i] / dt).collect();
    for (e, a) in face.iter().enumerate() {
        let g = (1.0 - th) * a * (w[e + 1] - w[e]);
        rhs[e] += g;
        rhs[e + 1] -= g;
        diag[e] += th * a;
        diag[e + 1] += th * a;
    }
    let off: Vec<f64> = face.iter().map(|a| -th * a).collect();
    solve_tridiagonal(&off, &diag, &off, &rhs).ok_or(Error::NoConvergence("singular linear step".into()))
}

/// Integrates a linear flow from `w0`. Records carry the mass, the variance
/// ∫|w − M|²dμ (OU) or ‖u‖₂² (heat) as `rel_entropy`, and for OU the entropy
/// ∫w log(w/M)dμ as `entropy`.
pub fn run_linear(kind: LinearKind, w0: &dyn Fn(f64) -> f64, mesh: LinearMesh, cfg: &FlowConfig) -> Result<FlowResult> {
    cfg.validate()?;
    ensure!(mesh.cells >= 16, "mesh needs at least 16 cells, got {}", mesh.cells);
    ensure!(mesh.extent > 0.0, "mesh extent must be positive");
    let (x, mass, face) = match kind {
        LinearKind::Heat { dim } => {
            ensure!(dim >= 1.0, "dimension must be at least 1, got {dim}");
            let g = make_grid(mesh.cells + 1, mesh.extent, 1.0)?;
            let m = Mesh::new(&g, dim);
            (m.r, m.mass, m.c)
        }
        LinearKind::Ou(pot) => {
            let phi = move |t: f64| pot.value(t);
            let (lo, hi, vmin) = support(&phi, mesh.extent)?;
            let s = OuSystem::new(&phi, mesh.cells, lo, hi, vmin);
            (s.x, s.w, s.face)
        }
    };
    let mut w: Vec<f64> = x.iter().map(|t| w0(*t)).collect();
    ensure!(w.iter().all(|v| v.is_finite()), "initial datum is not finite on the mesh");
    let ou = matches!(kind, LinearKind::Ou(_));
    let diag = |w: &[f64], t: f64| {
        let m: f64 = w.iter().zip(&mass).map(|(a, b)| a * b).sum();
        let (var, ent) = if ou {
            let var = w.iter().zip(&mass).map(|(a, b)| b * (a - m) * (a - m)).sum();
            let ent = (m > 0.0 && w.iter().all(|v| *v > 0.0))
                .then(|| w.iter().zip(&mass).map(|(a, b)| b * a * libm::log(a / m)).sum());
            (var, ent)
        } else {
            (w.iter().zip(&mass).map(|(a, b)| b * a * a).sum(), None)
        };
        DiagnosticsRecord { t, mass: m, entropy: ent, rel_entropy: Some(var), ..Default::default() }
    };
    let mut out = FlowResult {
        records: Vec::new(),
        empirical_t_star: None,
        fitted_rates: Default::default(),
        identity_rhs: Vec::new(),
        clipped: 0,
        final_values: Vec::new(),
    };
    let steps = cfg.steps();
    let th = cfg.scheme.theta();
    for k in 0..=steps {
        if k > 0 {
            w = theta_step(&mass, &face, &w, cfg.dt, th)?;
        }
        if cfg.records_at(k, steps) {
            out.records.push(diag(&w, k as f64 * cfg.dt));
        }
    }
    out.final_values = w;
    let t_last = out.records.last().map_or(0.0, |r| r.t);
    let tail: Vec<&DiagnosticsRecord> = out.records.iter().filter(|r| r.t >= 2.0 * t_last / 3.0 && r.t > 0.0).collect();
    let logs = |f: &dyn Fn(&DiagnosticsRecord) -> Option<f64>, logt: bool| -> Vec<(f64, f64)> {
        tail.iter()
            .filter_map(|r| f(r).filter(|v| *v > 0.0).map(|v| (if logt { libm::log(r.t) } else { r.t }, libm::log(v))))
            .collect()
    };
    if ou {
        out.fitted_rates.variance_decay = slope(&logs(&|r| r.rel_entropy, false)).map(|s| -s);
        out.fitted_rates.entropy_decay = slope(&logs(&|r| r.entropy, false)).map(|s| -s);
    } else {
        out.fitted_rates.power_exponent = slope(&logs(&|r| r.rel_entropy, true));
    }
    Ok(out)
}
