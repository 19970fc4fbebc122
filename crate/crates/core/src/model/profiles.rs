use alloc::sync::Arc;
use alloc::vec::Vec;

use super::grid::RadialGrid;
use super::params::{CknParams, ProblemParams};
use super::profile::{PowerTail, RadialField, RadialProfile};
use crate::error::{ensure, Result};

/// Barenblatt profile 𝓑(r) = (1 + r²)^{1/(m−1)} in dimension n, rescaled in
/// amplitude when the parameters carry a mass.
pub fn barenblatt(params: &ProblemParams, grid: Arc<RadialGrid>) -> Result<RadialProfile> {
    let b = barenblatt_with_scale(params, grid, 1.0)?;
    match params.mass() {
        None => Ok(b),
        Some(mass) => {
            let c = mass / b.mass();
            let values = b.values().iter().map(|v| c * v).collect();
            let tail = PowerTail { amplitude: c, ..*b.tail().unwrap() };
            Ok(b.with_values(values)?.with_closed_form(tail))
        }
    }
}

/// Mass-preserving dilation σ^{−n} 𝓑(r/σ) of the Barenblatt profile.
pub fn barenblatt_with_scale(params: &ProblemParams, grid: Arc<RadialGrid>, sigma: f64) -> Result<RadialProfile> {
    let m = params.m();
    ensure!(m < 1.0, "Barenblatt profile needs m < 1, got {m}");
    ensure!(sigma > 0.0, "dilation factor must be positive");
    let n = params.n();
    let q = 1.0 / (1.0 - m);
    let amp = libm::pow(sigma, -n);
    let tail = PowerTail { amplitude: amp, scale: sigma, beta: 2.0, q };
    let values = grid.nodes().iter().map(|&r| tail.value(r)).collect();
    Ok(RadialProfile::new(grid, values, n)?.with_closed_form(tail))
}

/// Which explicit optimizer to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerFamily {
    /// (1 + r²)^{−(d−2)/2}
    Sobolev { d: u32 },
    /// (1 + r²)^{−1/(p−1)}
    Gns { d: u32, p: f64 },
    /// (1 + r^{(p−2)(a_c−a)})^{−2/(p−2)}
    Ckn(CknParams),
}

impl OptimizerFamily {
    /// Far-field description of the optimizer (amplitude 1, unit scale).
    pub fn tail(&self) -> Result<PowerTail> {
        match *self {
            OptimizerFamily::Sobolev { d } => {
                ensure!(d >= 3, "Sobolev optimizer needs d >= 3, got {d}");
                Ok(PowerTail { amplitude: 1.0, scale: 1.0, beta: 2.0, q: (d as f64 - 2.0) / 2.0 })
            }
            OptimizerFamily::Gns { d, p } => {
                ensure!(d >= 1 && p > 1.0, "GNS optimizer needs p > 1, got {p}");
                if d >= 3 {
                    let ps = d as f64 / (d as f64 - 2.0);
                    ensure!(p <= ps + 1e-14, "GNS optimizer needs p <= d/(d-2) = {ps}, got {p}");
                }
                Ok(PowerTail { amplitude: 1.0, scale: 1.0, beta: 2.0, q: 1.0 / (p - 1.0) })
            }
            OptimizerFamily::Ckn(c) => {
                ensure!(c.is_admissible(), "inadmissible CKN parameters {c:?}");
                let p = c.p();
                ensure!(p > 2.0, "CKN optimizer needs b < a + 1 (p > 2)");
                Ok(PowerTail { amplitude: 1.0, scale: 1.0, beta: c.optimizer_exponent(), q: 2.0 / (p - 2.0) })
            }
        }
    }

    pub fn dim(&self) -> u32 {
        match *self {
            OptimizerFamily::Sobolev { d } | OptimizerFamily::Gns { d, .. } => d,
            OptimizerFamily::Ckn(c) => c.d,
        }
    }
}

/// Explicit optimizer 𝗀 of the requested family on `grid`, with its tail.
pub fn aubin_talenti(grid: Arc<RadialGrid>, family: OptimizerFamily) -> Result<RadialProfile> {
    aubin_talenti_scaled(grid, family, 1.0, 1.0)
}

/// c·𝗀(r/σ): amplitude c and dilation σ applied to the optimizer.
pub fn aubin_talenti_scaled(grid: Arc<RadialGrid>, family: OptimizerFamily, c: f64, sigma: f64) -> Result<RadialProfile> {
    ensure!(c > 0.0 && sigma > 0.0, "amplitude and dilation must be positive");
    let tail = PowerTail { amplitude: c, scale: sigma, ..family.tail()? };
    let values = grid.nodes().iter().map(|&r| tail.value(r)).collect();
    Ok(RadialProfile::new(grid, values, family.dim() as f64)?.with_closed_form(tail))
}

/// Pressure 𝖯 = m/(m − 1) u^{m−1}.
pub fn pressure_of(u: &RadialProfile, m: f64) -> Result<RadialField> {
    ensure!((m - 1.0).abs() > 1e-12, "pressure is undefined at m = 1");
    ensure!(m > 0.0, "m must be positive");
    ensure!(u.values().iter().all(|v| *v > 0.0), "pressure needs a strictly positive profile");
    let c = m / (m - 1.0);
    let values: Vec<f64> = u.values().iter().map(|v| c * libm::pow(*v, m - 1.0)).collect();
    Ok(RadialField { grid: u.grid().clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_grid;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(make_grid(400, 20.0, 1.0).unwrap())
    }

    #[test]
    fn barenblatt_values() {
        let p = ProblemParams::new(3, 0.8).unwrap();
        let g = Arc::new(RadialGrid::from_nodes(alloc::vec![0.0, 0.5, 1.0, 2.0]).unwrap());
        let b = barenblatt(&p, g).unwrap();
        assert_eq!(b.values()[0], 1.0);
        assert!((b.values()[2] - 0.03125).abs() < 1e-16);
    }

    #[test]
    fn barenblatt_mass_normalization() {
        let p = ProblemParams::new(3, 0.8).unwrap().with_mass(2.5).unwrap();
        let b = barenblatt(&p, grid()).unwrap();
        assert!((b.mass() - 2.5).abs() < 1e-8);
    }

    #[test]
    fn optimizer_values() {
        let g = Arc::new(RadialGrid::from_nodes(alloc::vec![0.0, 1.0, 3.0]).unwrap());
        let s = aubin_talenti(g.clone(), OptimizerFamily::Sobolev { d: 4 }).unwrap();
        assert!((s.values()[1] - 0.5).abs() < 1e-16);
        let q = aubin_talenti(g.clone(), OptimizerFamily::Gns { d: 3, p: 2.0 }).unwrap();
        assert!((q.values()[2] - 0.1).abs() < 1e-16);
        let c = aubin_talenti(g.clone(), OptimizerFamily::Ckn(CknParams::new(3, 0.0, 0.0).unwrap())).unwrap();
        let s3 = aubin_talenti(g, OptimizerFamily::Sobolev { d: 3 }).unwrap();
        for (x, y) in c.values().iter().zip(s3.values()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn pressure_of_barenblatt() {
        let p = ProblemParams::new(3, 0.8).unwrap();
        let b = barenblatt(&p, grid()).unwrap();
        let pr = pressure_of(&b, 0.8).unwrap();
        for (r, v) in b.nodes().iter().zip(&pr.values) {
            assert!((v + 4.0 * (1.0 + r * r)).abs() < 1e-10 * (1.0 + r * r));
        }
        assert!(pressure_of(&b, 1.0).is_err());
    }
}
