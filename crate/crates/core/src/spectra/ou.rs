use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{lowest_by_count, richardson};
use crate::error::{ensure, Error, Result};
use crate::linalg::{dot, SymTridiagonal};

/// Potentials with a name, for the command line; any closure works with the
/// solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// φ = k x²/2.
    Harmonic { k: f64 },
    /// φ = x⁴/4 − x²/2.
    DoubleWell,
    /// φ = x⁴/4.
    Quartic,
}

impl Potential {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Potential::Harmonic { k } => 0.5 * k * x * x,
            Potential::DoubleWell => 0.25 * x * x * x * x - 0.5 * x * x,
            Potential::Quartic => 0.25 * x * x * x * x,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "harmonic" => Some(Potential::Harmonic { k: 1.0 }),
            "double-well" => Some(Potential::DoubleWell),
            "quartic" => Some(Potential::Quartic),
            _ => None,
        }
    }
}

/// Uniform mesh with `cells` cells on the interval where φ − min φ ≤ `depth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuMesh {
    pub cells: usize,
    pub depth: f64,
}

impl Default for OuMesh {
    fn default() -> Self {
        OuMesh { cells: 2000, depth: 60.0 }
    }
}

/// Interval carrying all but e^{−depth} of the measure e^{−φ}.
pub(crate) fn support(phi: &dyn Fn(f64) -> f64, depth: f64) -> Result<(f64, f64, f64)> {
    let mut x = 4.0;
    while x <= 1e4 {
        let n = 20_000;
        let xs: Vec<f64> = (0..=n).map(|i| -x + 2.0 * x * i as f64 / n as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|t| phi(*t)).collect();
        ensure!(vals.iter().all(|v| !v.is_nan()), "potential returned NaN");
        let (imin, vmin) = vals.iter().enumerate().fold((0, f64::INFINITY), |a, (i, v)| if *v < a.1 { (i, *v) } else { a });
        if vals[0] - vmin > depth && vals[n] - vmin > depth {
            let lo = (0..imin).rev().find(|&i| vals[i] - vmin > depth).unwrap_or(0);
            let hi = (imin..=n).find(|&i| vals[i] - vmin > depth).unwrap_or(n);
            return Ok((xs[lo], xs[hi], vmin));
        }
        x *= 2.0;
    }
    Err(Error::param("potential is not confining: e^(-phi) does not decay within |x| <= 1e4"))
}

/// Weighted finite volumes: stiffness ∫f'²e^{−φ}, lumped mass ∫f²e^{−φ},
/// both normalized so the mass weights sum to one.
pub(crate) struct OuSystem {
    pub(crate) x: Vec<f64>,
    pub(crate) face: Vec<f64>,
    pub(crate) w: Vec<f64>,
}

impl OuSystem {
    pub(crate) fn new(phi: &dyn Fn(f64) -> f64, cells: usize, lo: f64, hi: f64, vmin: f64) -> Self {
        let h = (hi - lo) / cells as f64;
        let x: Vec<f64> = (0..=cells).map(|i| lo + h * i as f64).collect();
        let rho = |t: f64| libm::exp(vmin - phi(t));
        let mut w: Vec<f64> = x.iter().map(|t| rho(*t) * h).collect();
        w[0] *= 0.5;
        w[cells] *= 0.5;
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= z);
        let face = (0..cells).map(|i| rho(x[i] + 0.5 * h) / (h * z)).collect();
        OuSystem { x, face, w }
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; f.len()];
        for (i, a) in self.face.iter().enumerate() {
            let g = a * (f[i + 1] - f[i]);
            y[i] -= g;
            y[i + 1] += g;
        }
        y
    }

    fn energy(&self, f: &[f64]) -> f64 {
        self.face.iter().enumerate().map(|(i, a)| a * (f[i + 1] - f[i]) * (f[i + 1] - f[i])).sum()
    }

    fn scaled(&self) -> (SymTridiagonal, Vec<f64>) {
        let n = self.w.len();
        let sw: Vec<f64> = self.w.iter().map(|v| libm::sqrt(*v)).collect();
        let mut diag = vec![0.0; n];
        for (i, a) in self.face.iter().enumerate() {
            diag[i] += a;
            diag[i + 1] += a;
        }
        let d = (0..n).map(|i| diag[i] / self.w[i]).collect();
        let o = (0..n - 1).map(|i| -self.face[i] / (sw[i] * sw[i + 1])).collect();
        (SymTridiagonal::new(d, o), sw)
    }

    fn kappa0(&self) -> f64 {
        let (op, _) = self.scaled();
        lowest_by_count(&|s| op.count_below(s), 2, -1.0)[1]
    }
}

/// Poincaré constant κ₀ of dμ = e^{−φ}dx/Z: the first nonzero eigenvalue of
/// −f'' + φ'f' in L²(dμ), Richardson-extrapolated from two meshes.
pub fn ou_kappa0(phi: &dyn Fn(f64) -> f64, mesh: OuMesh) -> Result<f64> {
    ensure!(mesh.cells >= 64, "mesh needs at least 64 cells, got {}", mesh.cells);
    let (lo, hi, vmin) = support(phi, mesh.depth)?;
    let k1 = OuSystem::new(phi, mesh.cells, lo, hi, vmin).kappa0();
    let k2 = OuSystem::new(phi, 2 * mesh.cells, lo, hi, vmin).kappa0();
    let k = richardson(k1, k2);
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::NoConvergence(format!("Poincare gap not positive: {k}")));
    }
    Ok(k)
}

/// ess-inf φ'' over the computational interval (second differences).
pub fn bakry_emery_bound(phi: &dyn Fn(f64) -> f64, mesh: OuMesh) -> Result<f64> {
    let (lo, hi, _) = support(phi, mesh.depth)?;
    let h = (hi - lo) / mesh.cells as f64;
    Ok((1..mesh.cells)
        .map(|i| {
            let x = lo + h * i as f64;
            (phi(x + h) - 2.0 * phi(x) + phi(x - h)) / (h * h)
        })
        .fold(f64::INFINITY, f64::min))
}

/// Minimum of the entropy quotient with the minimizer that reached it.
#[derive(Debug, Clone, PartialEq)]
pub struct Kappa1Result {
    pub value: f64,
    pub nodes: Vec<f64>,
    /// Minimizer normalized to mean one.
    pub minimizer: Vec<f64>,
    /// ‖f − 1‖ in L²(dμ) of the minimizer.
    pub deviation: f64,
    pub starts: usize,
}

/// (denominator, gradient of the denominator) of 𝓠_p at f with mean one.
fn denominator(sys: &OuSystem, f: &[f64], p: f64) -> (f64, Vec<f64>) {
    let w = &sys.w;
    if (p - 2.0).abs() < 1e-12 {
        // ∫f² log(f²/M), integrand written as M(u log u − u + 1), u = f²/M
        let mm = dot(w, &f.iter().map(|v| v * v).collect::<Vec<_>>());
        let lm = libm::log(mm);
        let mut ent = 0.0;
        let mut grad = vec![0.0; f.len()];
        for i in 0..f.len() {
            let x = 2.0 * libm::log(f[i]) - lm;
            let t = if x.abs() < 1e-3 {
                x * x * (0.5 + x * (1.0 / 3.0 + x / 8.0))
            } else {
                x * libm::exp(x) - libm::expm1(x)
            };
            ent += w[i] * t;
            grad[i] = 2.0 * w[i] * f[i] * x;
        }
        return (mm * ent, grad);
    }
    // f = mean·(1 + h) with ∫h = 0
    let mean = dot(w, f);
    let h: Vec<f64> = f.iter().map(|v| v / mean - 1.0).collect();
    let h2 = dot(w, &h.iter().map(|v| v * v).collect::<Vec<_>>());
    let s: f64 = w.iter().zip(&h).map(|(wi, hi)| wi * libm::expm1(p * libm::log1p(*hi))).sum();
    let den = mean * mean * (h2 - libm::expm1(2.0 / p * libm::log1p(s)));
    let sp = libm::pow(mean, p) * (1.0 + s);
    let c = libm::pow(sp, 2.0 / p - 1.0);
    let grad = (0..f.len()).map(|i| 2.0 * w[i] * (f[i] - c * libm::pow(f[i], p - 1.0))).collect();
    (den, grad)
}

fn quotient(sys: &OuSystem, f: &[f64], p: f64) -> (f64, Vec<f64>) {
    let num_scale = if (p - 2.0).abs() < 1e-12 { 2.0 } else { 2.0 - p };
    let num = num_scale * sys.energy(f);
    let (den, dgrad) = denominator(sys, f, p);
    if !(den > 0.0) {
        return (f64::INFINITY, vec![0.0; f.len()]);
    }
    let q = num / den;
    let an = sys.apply(f);
    let grad = (0..f.len()).map(|i| (2.0 * num_scale * an[i] - q * dgrad[i]) / den).collect();
    (q, grad)
}

/// Projected, H¹-preconditioned gradient descent with Armijo steps.
fn descend(sys: &OuSystem, mut f: Vec<f64>, p: f64, iters: usize) -> (f64, Vec<f64>) {
    let n = f.len();
    // H¹ Riesz map: (A + W)
    let mut diag = sys.w.clone();
    for (i, a) in sys.face.iter().enumerate() {
        diag[i] += a;
        diag[i + 1] += a;
    }
    let riesz = SymTridiagonal::new(diag, sys.face.iter().map(|a| -a).collect());
    let normalize = |f: &mut Vec<f64>| {
        let mean = dot(&sys.w, f);
        f.iter_mut().for_each(|v| *v = (*v / mean).max(1e-9));
    };
    normalize(&mut f);
    let (mut q, mut g) = quotient(sys, &f, p);
    let mut step = 1.0;
    let mut checkpoint = q;
    for it in 0..iters {
        if it % 50 == 49 {
            if checkpoint - q < 1e-8 * q.abs() {
                break;
            }
            checkpoint = q;
        }
        let dir = riesz.solve(&g);
        let slope = dot(&g, &dir);
        if !(slope > 0.0) || slope < 1e-30 {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial: Vec<f64> = (0..n).map(|i| f[i] - step * dir[i]).collect();
            normalize(&mut trial);
            let (qt, gt) = quotient(sys, &trial, p);
            if qt <= q - 1e-4 * step * slope {
                let gain = q - qt;
                f = trial;
                q = qt;
                g = gt;
                accepted = true;
                step *= 2.0;
                if gain < 1e-13 * q.abs() {
                    return (q, f);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (q, f)
}

/// κ₁ = inf 𝓠_p[f] over positive f, with 𝓠_p = (2−p)∫|f'|²/(∫f² − (∫f^p)^{2/p})
/// for p ∈ [1,2) and 2∫|f'|²/∫f² log(f²/∫f²) at p = 2. Eight seeded random
/// starts plus one near-constant start.
pub fn kappa1_minimize(phi: &dyn Fn(f64) -> f64, p: f64, mesh: OuMesh, seed: u64) -> Result<Kappa1Result> {
    ensure!((1.0..=2.0).contains(&p), "p must lie in [1, 2], got {p}");
    ensure!(mesh.cells >= 64, "mesh needs at least 64 cells, got {}", mesh.cells);
    let (lo, hi, vmin) = support(phi, mesh.depth)?;
    let sys = OuSystem::new(phi, mesh.cells, lo, hi, vmin);
    let width = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    // smallest Poincaré mode, as a near-constant start
    let (op, sw) = sys.scaled();
    let k0 = lowest_by_count(&|s| op.count_below(s), 2, -1.0)[1];
    let mut v: Vec<f64> = sys.x.iter().map(|x| x - 0.5 * (lo + hi)).collect();
    for _ in 0..3 {
        let (y, _) = op.shifted_solve(k0 * (1.0 - 1e-9), &v.iter().zip(&sw).map(|(a, b)| a * b).collect::<Vec<_>>());
        let mut z: Vec<f64> = y.iter().zip(&sw).map(|(a, b)| a / b).collect();
        let mean = dot(&sys.w, &z);
        z.iter_mut().for_each(|t| *t -= mean);
        let nrm = libm::sqrt(dot(&sys.w, &z.iter().map(|t| t * t).collect::<Vec<_>>()));
        v = z.iter().map(|t| t / nrm).collect();
    }
    let vmax = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    starts.push(v.iter().map(|t| 1.0 + 1e-3 * t / vmax).collect());
    for _ in 0..8 {
        let terms: Vec<(f64, f64, f64)> = (0..4)
            .map(|k| (rng.random_range(-1.0..1.0), (k + 1) as f64, rng.random_range(0.0..core::f64::consts::TAU)))
            .collect();
        let amp = rng.random_range(0.05..0.6);
        starts.push(
            sys.x
                .iter()
                .map(|x| {
                    let t = (x - lo) / width * core::f64::consts::PI;
                    let s: f64 = terms.iter().map(|(a, k, ph)| a * libm::sin(k * t + ph)).sum();
                    1.0 + amp * s / 4.0
                })
                .collect(),
        );
    }
    let total = starts.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in starts {
        let (q, f) = descend(&sys, s, p, 1500);
        if q.is_finite() && best.as_ref().is_none_or(|b| q < b.0) {
            best = Some((q, f));
        }
    }
    let (value, minimizer) = best.ok_or_else(|| Error::NoConvergence(format!("no start produced a finite quotient for p = {p}")))?;
    if !(value > 0.0) {
        return Err(Error::NoConvergence(format!("best quotient {value} is not positive")));
    }
    let deviation = libm::sqrt(dot(&sys.w, &minimizer.iter().map(|t| (t - 1.0) * (t - 1.0)).collect::<Vec<_>>()));
    Ok(Kappa1Result { value, nodes: sys.x.clone(), minimizer, deviation, starts: total })
}
