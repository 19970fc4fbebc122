use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{lowest_by_count, richardson, EigenResult};
use crate::error::{ensure, Result};
use crate::linalg::SymTridiagonal;

/// Radial mesh for the Hardy–Poincaré problem: `cells` uniform cells in
/// y = log(1 + r) on [0, log(1 + r_max)]. Meshes cells, 2·cells and 4·cells
/// are solved for the extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpMesh {
    pub cells: usize,
    pub r_max: f64,
}

impl Default for HpMesh {
    fn default() -> Self {
        HpMesh { cells: 3000, r_max: 1e8 }
    }
}

struct Sector {
    op: SymTridiagonal,
    sqrt_w: Vec<f64>,
    r: Vec<f64>,
}

/// Finite volumes for 2(1−m)∫𝓑|h'|² + 2(1−m)ℓ(ℓ+d−2)∫𝓑h²/r² against
/// ∫𝓑^{2−m}h², r^{d−1}dr, symmetrized by the mass.
fn sector(d: f64, m: f64, l: u32, cells: usize, r_max: f64) -> Sector {
    let ymax = libm::log1p(r_max);
    let r: Vec<f64> = (0..=cells).map(|i| libm::expm1(ymax * i as f64 / cells as f64)).collect();
    let bar = |x: f64| libm::pow(1.0 + x * x, 1.0 / (m - 1.0));
    let c = 2.0 * (1.0 - m);
    let mid: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let face: Vec<f64> = (0..cells).map(|i| c * bar(mid[i]) * libm::pow(mid[i], d - 1.0) / (r[i + 1] - r[i])).collect();
    // dual cell edges
    let mut e = Vec::with_capacity(cells + 2);
    e.push(0.0);
    e.extend_from_slice(&mid);
    e.push(r[cells]);
    let moment = |i: usize, q: f64| (libm::pow(e[i + 1], q) - libm::pow(e[i], q)) / q;
    let n = cells + 1;
    let mut diag = vec![0.0; n];
    for i in 0..cells {
        diag[i] += face[i];
        diag[i + 1] += face[i];
    }
    let w: Vec<f64> = (0..n).map(|i| libm::pow(bar(r[i]), 2.0 - m) * moment(i, d)).collect();
    let cent = (l * (l + d as u32).saturating_sub(2)) as f64;
    if cent > 0.0 {
        for i in 1..n {
            diag[i] += c * cent * bar(r[i]) * moment(i, d) / (r[i] * r[i]);
        }
    }
    // nonradial sectors vanish at the origin
    let start = if l > 0 { 1 } else { 0 };
    let sqrt_w: Vec<f64> = w[start..].iter().map(|x| libm::sqrt(*x)).collect();
    let sd: Vec<f64> = (start..n).map(|i| diag[i] / w[i]).collect();
    let so: Vec<f64> = (start..cells).map(|i| -face[i] / (sqrt_w[i - start] * sqrt_w[i + 1 - start])).collect();
    Sector { op: SymTridiagonal::new(sd, so), sqrt_w, r: r[start..].to_vec() }
}

fn constraint(s: &Sector, phi: impl Fn(f64) -> f64) -> Vec<f64> {
    s.r.iter().zip(&s.sqrt_w).map(|(r, w)| w * phi(*r)).collect()
}

fn solve(d: f64, m: f64, level: u8, cells: usize, r_max: f64, count: usize) -> Vec<f64> {
    let mut all = Vec::new();
    for l in 0..2u32 {
        let s = sector(d, m, l, cells, r_max);
        let mut cons = Vec::new();
        if l == 0 {
            cons.push(constraint(&s, |_| 1.0));
            if level >= 2 {
                cons.push(constraint(&s, |r| r * r));
            }
        } else if level >= 1 {
            cons.push(constraint(&s, |r| r));
        }
        let counter = |x: f64| s.op.constrained_count_below(x, &cons);
        all.extend(lowest_by_count(&counter, count, -1.0));
    }
    all.sort_by(|a, b| a.total_cmp(b));
    all.truncate(count);
    all
}

/// Spectrum of the linearized relative Fisher information against the
/// linearized relative entropy around 𝓑, in the radial and first angular
/// sectors. Level 0 removes ∫h𝓑^{2−m}, level 1 also ∫x h𝓑^{2−m}, level 2
/// also ∫|x|²h𝓑^{2−m}.
pub fn hardy_poincare_spectrum(d: u32, m: f64, level: u8, mesh: HpMesh) -> Result<EigenResult> {
    ensure!(d >= 1, "dimension must be at least 1");
    ensure!(level <= 2, "constraint level must be 0, 1 or 2, got {level}");
    ensure!(m > 0.0 && m < 1.0, "m must lie in (0, 1), got {m}");
    let df = d as f64;
    let m1 = (df - 1.0) / df;
    if level < 2 {
        ensure!(m > m1, "levels 0 and 1 need m in (m1, 1) = ({m1}, 1), got {m}");
    } else {
        ensure!(m >= m1, "level 2 needs m >= m1 = {m1}, got {m}");
    }
    ensure!(mesh.cells >= 64, "mesh needs at least 64 cells, got {}", mesh.cells);
    ensure!(mesh.r_max > 10.0 && mesh.r_max.is_finite(), "r_max must exceed 10, got {}", mesh.r_max);

    let count = 6;
    let coarse = solve(df, m, level, 2 * mesh.cells, mesh.r_max, count);
    let fine = solve(df, m, level, 4 * mesh.cells, mesh.r_max, count);
    let mut constraints: Vec<String> = vec![String::from("int h B^(2-m) dx = 0")];
    if level >= 1 {
        constraints.push(String::from("int x h B^(2-m) dx = 0"));
    }
    if level >= 2 {
        constraints.push(String::from("int |x|^2 h B^(2-m) dx = 0"));
    }
    Ok(EigenResult {
        richardson_estimate: richardson(coarse[0], fine[0]),
        eigenvalues: fine,
        constraints,
        mesh_size: 4 * mesh.cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_angular_mode_sits_at_four() {
        let r = hardy_poincare_spectrum(3, 0.8, 0, HpMesh { cells: 400, r_max: 1e6 }).unwrap();
        assert!((r.richardson_estimate - 4.0).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn rejects_inadmissible_m() {
        assert!(hardy_poincare_spectrum(3, 0.6, 0, HpMesh::default()).unwrap_err().is_input_error());
        assert!(hardy_poincare_spectrum(3, 0.8, 3, HpMesh::default()).is_err());
    }
}
