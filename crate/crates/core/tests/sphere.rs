use std::sync::Arc;

use entroflow_core::sphere::{
    bifurcation_points, constant_branch, continue_branch, gegenbauer, is_concave, kappa_p, mu_of_lambda, residual, Branch,
    StepConfig, Symmetry, ZonalGrid, ZonalProfile,
};
use proptest::prelude::*;

fn cfg() -> StepConfig {
    StepConfig::default()
}

fn bounded(lambda_min: f64, lambda_max: f64, max_steps: usize) -> StepConfig {
    StepConfig { lambda_min, lambda_max, max_steps, ..StepConfig::default() }
}

#[test]
fn constants_solve_the_collocated_equation() {
    let g = Arc::new(ZonalGrid::new(3, 48).unwrap());
    for (lam, p) in [(2.0, 3.0), (7.5, 2.5), (0.3, 4.0)] {
        let c = f64::powf(lam, 1.0 / (p - 2.0));
        let u = ZonalProfile::from_fn(g.clone(), |_| c);
        let r = residual(&u, lam, p).unwrap();
        let scale = lam * c;
        assert!(r.iter().all(|v| v.abs() < 1e-11 * scale), "{r:?}");
    }
}

#[test]
fn smooth_nonconstant_profile_has_a_residual() {
    let g = Arc::new(ZonalGrid::new(3, 48).unwrap());
    let u = ZonalProfile::from_fn(g, |z| 1.0 + 0.3 * z + 0.1 * z * z * z);
    let r = residual(&u, 2.0, 3.0).unwrap();
    assert!(r.iter().any(|v| v.abs() > 1e-2));
    let g = Arc::new(ZonalGrid::new(3, 16).unwrap());
    let bad = ZonalProfile::from_fn(g, |z| z);
    assert!(residual(&bad, 2.0, 3.0).is_err());
}

// residual at a profile built from a zonal harmonic: the linear part is
// known in closed form, so the collocation must reproduce it
#[test]
fn residual_matches_harmonic_oracle() {
    let (d, p, lam, eps) = (4u32, 3.0, 5.0, 0.2);
    let nu = (d as f64 - 1.0) / 2.0;
    let g = Arc::new(ZonalGrid::new(d, 40).unwrap());
    let u = ZonalProfile::from_fn(g.clone(), |z| 2.0 + eps * gegenbauer(3, nu, z));
    let r = residual(&u, lam, p).unwrap();
    let ll = 3.0 * (3.0 + d as f64 - 1.0);
    for (z, ri) in g.nodes().iter().zip(&r) {
        let h = gegenbauer(3, nu, *z);
        let v = 2.0 + eps * h;
        let expect = (p - 2.0) * ll * eps * h + lam * v - v.powf(p - 1.0);
        assert!((ri - expect).abs() < 1e-10, "{ri} {expect}");
    }
}

#[test]
fn bifurcations_of_the_constant_branch() {
    let b = bifurcation_points(3, 3.0, 10.0, Symmetry::None, &cfg()).unwrap();
    assert_eq!(b.len(), 2, "{b:?}");
    assert!((b[0] - 3.0).abs() < 1e-6 && (b[1] - 8.0).abs() < 1e-6, "{b:?}");
    let b = bifurcation_points(5, 3.0, 15.0, Symmetry::None, &cfg()).unwrap();
    assert!((b[0] - 5.0).abs() < 1e-6 && (b[1] - 12.0).abs() < 1e-6, "{b:?}");
    // odd modes are absent among antipodal functions
    let b = bifurcation_points(5, 3.0, 25.0, Symmetry::Antipodal, &cfg()).unwrap();
    assert_eq!(b.len(), 1, "{b:?}");
    assert!((b[0] - 12.0).abs() < 1e-6, "{b:?}");
}

#[test]
fn signature_steps_by_one_at_each_bifurcation() {
    for (d, l) in [(3u32, 1u32), (3, 2), (5, 1), (5, 2), (4, 3)] {
        let lam = (l * (l + d - 1)) as f64;
        let c = constant_branch(d, 3.0, &[lam * (1.0 - 1e-4), lam * (1.0 + 1e-4)], Symmetry::None, &cfg()).unwrap();
        let (a, b) = (c.points[0].jacobian_signature, c.points[1].jacobian_signature);
        assert_eq!(b, a + 1, "d={d} l={l}");
    }
}

#[test]
fn constant_branch_quotient_is_lambda() {
    let lams = [0.5, 1.0, 4.0, 9.0, 20.0];
    for sym in [Symmetry::None, Symmetry::Antipodal] {
        let c = constant_branch(4, 2.7, &lams, sym, &cfg()).unwrap();
        for (pt, lam) in c.points.iter().zip(lams) {
            assert!(pt.is_constant);
            assert_eq!(pt.mu, lam);
            assert!(pt.residual < 1e-10);
        }
    }
}

fn check_points(b: &Branch) {
    for pt in &b.points {
        assert!(pt.residual < 1e-10, "residual {} at lambda {}", pt.residual, pt.lambda);
    }
    for w in b.points.windows(2) {
        assert!(w[1].arclength > w[0].arclength);
    }
}

#[test]
fn first_branch_lies_below_the_constants() {
    let b = continue_branch(1, 3, 3.0, 1.0, &bounded(1.0, 8.0, 200)).unwrap();
    check_points(&b);
    assert!((b.points[0].lambda - 3.0).abs() < 1e-3, "{}", b.points[0].lambda);
    let above: Vec<_> = b.points.iter().filter(|pt| pt.lambda > 3.0 + 1e-2).collect();
    assert!(above.len() > 5);
    for pt in above {
        assert!(pt.mu < pt.lambda, "mu {} lambda {}", pt.mu, pt.lambda);
    }
}

#[test]
fn first_branch_points_follow_the_critical_mode() {
    for (l, d) in [(1u32, 3u32), (2, 5)] {
        let b = continue_branch(l, d, 3.0, 1.0, &bounded(0.1, 40.0, 3)).unwrap();
        let pt = &b.points[0];
        let z = &b.profile_nodes;
        let mean = pt.profile.iter().sum::<f64>() / z.len() as f64;
        let nu = (d as f64 - 1.0) / 2.0;
        let h: Vec<f64> = z.iter().map(|z| gegenbauer(l as usize, nu, *z)).collect();
        let dev: Vec<f64> = pt.profile.iter().map(|u| u - mean).collect();
        let hm = h.iter().sum::<f64>() / h.len() as f64;
        let hc: Vec<f64> = h.iter().map(|v| v - hm).collect();
        let a = dev.iter().zip(&hc).map(|(x, y)| x * y).sum::<f64>() / hc.iter().map(|y| y * y).sum::<f64>();
        let err = dev.iter().zip(&hc).map(|(x, y)| (x - a * y).powi(2)).sum::<f64>().sqrt();
        let size = dev.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(size > 0.0 && err < 0.05 * size, "l={l}: {err} vs {size}");
    }
}

#[test]
fn antipodal_branch_has_a_turning_point_and_symmetry() {
    let b = continue_branch(2, 5, 10.0 / 3.0, 1.0, &bounded(1.0, 40.0, 60)).unwrap();
    check_points(&b);
    let lam: Vec<f64> = b.points.iter().map(|pt| pt.lambda).collect();
    let turns = lam.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
    assert!(turns >= 1, "{lam:?}");
    let n = b.profile_nodes.len();
    for pt in &b.points {
        for i in 0..n {
            assert!((pt.profile[i] - pt.profile[n - 1 - i]).abs() < 1e-12);
        }
    }
}

#[test]
fn mu_of_lambda_contract() {
    let grid = [1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0, 7.0];
    let c = mu_of_lambda(3, 3.0, &grid, &cfg()).unwrap();
    assert!(!c.certified);
    assert!(c.gaps.is_empty(), "{:?}", c.gaps);
    for (l, m) in grid.iter().zip(&c.mu) {
        if *l <= 3.0 {
            assert_eq!(l, m);
        } else {
            assert!(m < l, "mu({l}) = {m}");
        }
    }
    assert!(is_concave(&grid, &c.mu, 1e-8), "{:?}", c.mu);
}

#[test]
fn kappa_values() {
    assert_eq!(kappa_p(5, 1.0, &cfg()).unwrap(), 12.0);
    assert!(kappa_p(5, 1.5, &cfg()).is_err());
    let k: Vec<f64> = [3.0, 3.2, 10.0 / 3.0].iter().map(|p| kappa_p(5, *p, &cfg()).unwrap()).collect();
    assert!(k[0] > k[1] && k[1] > k[2], "{k:?}");
    let limit = 2f64.powf(0.4) * 5.0;
    assert!((k[2] - 6.59754).abs() < 5e-3 && (k[2] - limit).abs() < 5e-3, "{k:?}");
}

#[test]
fn kappa_is_mesh_converged() {
    for p in [3.0, 3.2] {
        let a = kappa_p(5, p, &StepConfig { nodes: 64, ..cfg() }).unwrap();
        let b = kappa_p(5, p, &StepConfig { nodes: 128, ..cfg() }).unwrap();
        assert!((a - b).abs() < 1e-4, "p={p}: {a} {b}");
    }
}

#[test]
fn inadmissible_parameters_are_rejected() {
    assert!(continue_branch(1, 3, 6.5, 1.0, &cfg()).is_err());
    assert!(continue_branch(3, 3, 3.0, 1.0, &cfg()).is_err());
    assert!(continue_branch(1, 1, 3.0, 1.0, &cfg()).is_err());
    assert!(kappa_p(5, 3.5, &cfg()).is_err());
    assert!(StepConfig { nodes: 8, ..cfg() }.nodes < 16 && kappa_p(5, 3.0, &StepConfig { nodes: 8, ..cfg() }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    // constant solutions have quotient λ for any admissible (d, p, λ)
    #[test]
    fn constants_have_quotient_lambda(d in 2u32..8, t in 0.05f64..0.95, lam in 0.1f64..40.0) {
        let top = if d == 2 { 8.0 } else { 2.0 * d as f64 / (d as f64 - 2.0) };
        let p = 2.0 + t * (top - 2.0);
        let c = constant_branch(d, p, &[lam], Symmetry::None, &cfg()).unwrap();
        prop_assert!(c.points[0].residual < 1e-10);
        prop_assert_eq!(c.points[0].mu, lam);
    }
}
