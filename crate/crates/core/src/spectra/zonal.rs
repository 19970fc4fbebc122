use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::EigenResult;
use crate::error::{ensure, Error, Result};
use crate::sphere::ZonalGrid;

/// Galerkin matrices of −(1−z²)h'' + dz h' on Gauss–Jacobi nodes; the
/// quadrature is exact for both forms, so eigenvalues are exact for ℓ < mesh.
fn galerkin(grid: &ZonalGrid) -> (DMatrix<f64>, Vec<f64>) {
    let n = grid.len();
    let dm = grid.differentiation();
    let z = grid.nodes();
    let w = grid.weights();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for q in 0..n {
        let c = w[q] * (1.0 - z[q] * z[q]);
        for i in 0..n {
            let a = c * dm[(q, i)];
            if a == 0.0 {
                continue;
            }
            for j in 0..n {
                k[(i, j)] += a * dm[(q, j)];
            }
        }
    }
    (k, w.to_vec())
}

fn symmetric_spectrum(k: &DMatrix<f64>, w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let s = DMatrix::from_fn(n, n, |i, j| 0.5 * (k[(i, j)] + k[(j, i)]) / libm::sqrt(w[i] * w[j]));
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

fn finish(mut ev: Vec<f64>, n_modes: usize, mesh: usize, constraint: &str) -> Result<EigenResult> {
    if ev[0].abs() > 1e-8 {
        return Err(Error::NoConvergence(alloc::format!("constant mode eigenvalue {} is not zero", ev[0])));
    }
    ev.remove(0);
    ev.truncate(n_modes);
    Ok(EigenResult {
        richardson_estimate: ev[0],
        eigenvalues: ev,
        constraints: vec![String::from(constraint)],
        mesh_size: mesh,
    })
}

fn check(d: u32, n_modes: usize, mesh: usize, factor: usize) -> Result<()> {
    ensure!(d >= 2, "zonal spectrum needs d >= 2, got {d}");
    ensure!(mesh >= 32, "mesh too coarse: {mesh} < 32 nodes");
    ensure!(n_modes >= 1 && factor * n_modes <= mesh / 2, "n_modes = {n_modes} needs mesh >= {}", 2 * factor * n_modes);
    Ok(())
}

/// The `n_modes` smallest positive eigenvalues of the zonal Laplace–Beltrami
/// operator on Sᵈ (ℓ(ℓ+d−1), ℓ ≥ 1).
pub fn sphere_zonal_spectrum(d: u32, n_modes: usize, mesh: usize) -> Result<EigenResult> {
    check(d, n_modes, mesh, 1)?;
    let grid = ZonalGrid::new(d, mesh)?;
    let (k, w) = galerkin(&grid);
    finish(symmetric_spectrum(&k, &w), n_modes, mesh, "int h dsigma = 0")
}

/// Same, restricted to antipodally symmetric (even in z) functions, which
/// keeps only even ℓ.
pub fn sphere_zonal_spectrum_even(d: u32, n_modes: usize, mesh: usize) -> Result<EigenResult> {
    check(d, n_modes, mesh, 2)?;
    let grid = ZonalGrid::new(d, mesh)?;
    let (k, w) = galerkin(&grid);
    let n = mesh;
    let half = n.div_ceil(2);
    // column i of P is e_i + e_{n−1−i} (e_i alone at the centre node)
    let pair = |i: usize| if i == n - 1 - i { vec![i] } else { vec![i, n - 1 - i] };
    let mut ke = DMatrix::<f64>::zeros(half, half);
    let mut we = vec![0.0; half];
    for a in 0..half {
        for &i in &pair(a) {
            we[a] += w[i];
            for b in 0..half {
                for &j in &pair(b) {
                    ke[(a, b)] += k[(i, j)];
                }
            }
        }
    }
    finish(symmetric_spectrum(&ke, &we), n_modes, mesh, "int h dsigma = 0; h(-z) = h(z)")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_projection_drops_odd_modes() {
        let r = sphere_zonal_spectrum_even(3, 3, 40).unwrap();
        for (k, ev) in r.eigenvalues.iter().enumerate() {
            let l = 2.0 * (k + 1) as f64;
            assert!((ev - l * (l + 2.0)).abs() < 1e-8, "{ev}");
        }
    }

    #[test]
    fn coarse_mesh_rejected() {
        assert!(sphere_zonal_spectrum(3, 3, 31).unwrap_err().is_input_error());
        assert!(sphere_zonal_spectrum(1, 3, 40).is_err());
    }
}
