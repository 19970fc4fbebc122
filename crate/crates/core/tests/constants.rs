use entroflow_core::constants::*;
use entroflow_core::model::{aubin_talenti_scaled, CknParams, OptimizerFamily, SubcriticalCkn};
use entroflow_core::special::{power_beta_integral, unit_sphere_area};
use proptest::prelude::*;

/// Quotient of the GNS optimizer from Beta integrals only.
fn gns_oracle(d: u32, p: f64) -> f64 {
    let df = d as f64;
    let s = unit_sphere_area(df);
    let q = 1.0 / (p - 1.0);
    let grad = s * 4.0 * q * q * power_beta_integral(df + 1.0, 2.0, 2.0 * q + 2.0);
    let lp1 = s * power_beta_integral(df - 1.0, 2.0, (p + 1.0) * q);
    let l2p = s * power_beta_integral(df - 1.0, 2.0, 2.0 * p * q);
    let th = gns_theta(d, p);
    grad.powf(th / 2.0) * lp1.powf((1.0 - th) / (p + 1.0)) / l2p.powf(1.0 / (2.0 * p))
}

#[test]
fn gns_constant_matches_beta_oracle() {
    for &(d, p) in &[(1, 2.0), (1, 5.0), (2, 1.5), (2, 4.0), (3, 2.0), (3, 2.9), (4, 1.7), (5, 1.2)] {
        let c = gns_optimal_constant(d, p).unwrap();
        let o = gns_oracle(d, p);
        assert!((c / o - 1.0).abs() < 1e-9, "d={d} p={p}: {c} vs {o}");
    }
}

#[test]
fn gns_constant_at_critical_exponent_is_sobolev() {
    for d in 3..=6 {
        let ps = d as f64 / (d as f64 - 2.0);
        let c = gns_optimal_constant(d, ps).unwrap();
        let s = sobolev_constant(d).unwrap();
        assert!((c * c / s - 1.0).abs() < 1e-6, "d={d}: {} vs {s}", c * c);
    }
}

#[test]
fn gns_quotient_is_scale_invariant() {
    let cfg = QuadratureConfig::default();
    let base = gns_optimal_constant(3, 2.0).unwrap();
    for &(c, sigma) in &[(0.3, 0.7), (5.0, 2.0), (1.0, 0.25)] {
        let g = aubin_talenti_scaled(cfg.grid().unwrap(), OptimizerFamily::Gns { d: 3, p: 2.0 }, c, sigma).unwrap();
        let q = gns_quotient(&g, 2.0);
        assert!((q / base - 1.0).abs() < 1e-8, "c={c} sigma={sigma}: {q} vs {base}");
    }
}

#[test]
fn gns_constant_refinement() {
    let a = gns_optimal_constant_with(3, 2.0, QuadratureConfig { n_nodes: 400, ..Default::default() }).unwrap();
    let b = gns_optimal_constant_with(3, 2.0, QuadratureConfig { n_nodes: 800, ..Default::default() }).unwrap();
    let c = gns_optimal_constant_with(3, 2.0, QuadratureConfig { n_nodes: 1600, ..Default::default() }).unwrap();
    assert!((b - c).abs() <= (a - b).abs() / 3.5 + 1e-14);
}

#[test]
fn weightless_ckn_reproduces_sobolev() {
    let c = CknParams::new(3, 0.0, 0.0).unwrap();
    let k = ckn_symmetric_constant(&c).unwrap();
    let s3 = sobolev_constant(3).unwrap();
    assert!((k.quadrature_value - 1.0 / s3).abs() < 1e-6, "{} vs {}", k.quadrature_value, 1.0 / s3);
    assert!(!k.formula_reliable);
}

#[test]
fn ckn_constant_weighted_point() {
    let c = CknParams::new(3, -0.5, 0.0).unwrap();
    let coarse = ckn_symmetric_constant_with(&c, QuadratureConfig { n_nodes: 400, ..Default::default() }).unwrap();
    let fine = ckn_symmetric_constant_with(&c, QuadratureConfig { n_nodes: 800, ..Default::default() }).unwrap();
    let finer = ckn_symmetric_constant_with(&c, QuadratureConfig { n_nodes: 1600, ..Default::default() }).unwrap();
    assert!(fine.quadrature_value > 0.0);
    let e1 = (coarse.quadrature_value - fine.quadrature_value).abs();
    let e2 = (fine.quadrature_value - finer.quadrature_value).abs();
    assert!(e2 <= e1 / 3.5 + 1e-13, "{e1} {e2}");
    // scale invariance of the quotient
    for sigma in [0.5, 3.0] {
        let g = aubin_talenti_scaled(QuadratureConfig::default().grid().unwrap(), OptimizerFamily::Ckn(c), 2.0, sigma).unwrap();
        assert!((ckn_quotient(&g, &c) / fine.quadrature_value - 1.0).abs() < 1e-8);
    }
}

#[test]
fn ckn_breaking_region_is_rejected() {
    let c = CknParams::new(3, -2.0, -1.5).unwrap();
    assert_eq!(felli_schneider(CknFamily::Critical(c)).region, Region::SymmetryBreaking);
    assert!(ckn_symmetric_constant(&c).is_err());
}

#[test]
fn classifiers_agree_on_sweep() {
    let mut count = 0;
    for d in 2..=6u32 {
        let ac = (d as f64 - 2.0) / 2.0;
        for i in 0..5 {
            for j in 0..4 {
                let a = ac - 0.1 - 0.8 * i as f64;
                let lo = if d == 2 { a + 1e-3 } else { a };
                let b = lo + (a + 1.0 - lo) * (j as f64 + 0.5) / 4.0;
                let c = CknParams::new(d, a, b).unwrap();
                let v = felli_schneider(CknFamily::Critical(c));
                assert_eq!(v.region == Region::Symmetry, symmetric_by_alpha(&c).unwrap(), "d={d} a={a} b={b}");
                count += 1;
            }
        }
    }
    assert_eq!(count, 100);
}

#[test]
fn delta_one_is_gamma_on_random_points() {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let d: u32 = rng.random_range(2..=10);
        let df = d as f64;
        let top = if d == 2 { 8.0 } else { 2.0 * df / (df - 2.0) };
        let p = rng.random_range(1.0001..top);
        let g = sphere_exponents(d, p).unwrap().gamma_p;
        let dl = sphere_delta(d, p, 1.0).unwrap();
        assert!((g - dl).abs() < 1e-12 * (1.0 + g.abs()), "d={d} p={p}: {g} vs {dl}");
    }
}

#[test]
fn delta_second_transcription() {
    // δ written in expanded form with s = κ + β − 1 = β(p − 1)
    let (d, p, m) = (3.0f64, 4.0f64, 0.9f64);
    let beta = 2.0 / (2.0 - p * (1.0 - m));
    let kappa = 1.0 + beta * (p - 2.0);
    let s = beta * (p - 1.0);
    let alt = -(d - 1.0).powi(2) / (d + 2.0).powi(2) * s * s + kappa * beta - kappa + d * s / (d + 2.0);
    let v = sphere_delta(3, 4.0, 0.9).unwrap();
    assert!((v - alt).abs() < 1e-13 && v.is_finite());
    assert!(sphere_delta(3, 2.0, 0.0).is_err());
}

#[test]
fn delta_at_p_one_by_substitution() {
    // p = 1: κ + β − 1 = 0 and δ = κ(β − 1) = −(β − 1)², zero only for m = 1
    for m in [0.5, 0.8, 1.0] {
        let beta = 2.0 / (1.0 + m);
        let v = sphere_delta(3, 1.0, m).unwrap();
        assert!((v + (beta - 1.0).powi(2)).abs() < 1e-14);
    }
}

#[test]
fn c0_scaling_and_composition() {
    let (d, m) = (3, 0.8);
    let a = renyi_growth_c0(d, m, 1.0).unwrap();
    let b = renyi_growth_c0(d, m, 2.0).unwrap();
    let e = ((d as f64 + 2.0) * m - d as f64) / (d as f64 * (1.0 - m));
    assert!((b / a - 2f64.powf(e)).abs() < 1e-12 * 2f64.powf(e));
    let c1 = renyi_growth_c0(1, 0.75, 1.0).unwrap();
    let cg = gns_optimal_constant(1, 2.0).unwrap();
    assert!((c1 - renyi_growth_c0_from(1, 0.75, 1.0, cg)).abs() < 1e-15);
    assert!(c1 > 0.0);
    assert!(renyi_growth_c0(3, 0.5, 1.0).is_err());
}

#[test]
fn subcritical_classifier() {
    let s = SubcriticalCkn::new(3, -0.5, -1.0, 1.2).unwrap();
    let v = felli_schneider(CknFamily::Subcritical(s));
    assert_ne!(v.region, Region::Inadmissible);
    // radicand negative: symmetric with boundary d − 2
    let s = SubcriticalCkn::new(3, 0.1, 1.0, 1.01).unwrap();
    let v = felli_schneider(CknFamily::Subcritical(s));
    assert_eq!(v.region, Region::Symmetry);
    assert_eq!(v.boundary_value, 1.0);
}

proptest! {
    #[test]
    fn b_fs_is_finite_and_below_a_plus_one(d in 2u32..10, x in 1e-9f64..50.0) {
        let ac = (d as f64 - 2.0) / 2.0;
        let a = ac - x;
        let b = b_fs(d, a);
        prop_assert!(b.is_finite());
        prop_assert!(b < a + 1.0);
    }

    #[test]
    fn ckn_map_round_trip(d in 3u32..9, x in 0.01f64..5.0, t in 0.0f64..0.999) {
        let a = (d as f64 - 2.0) / 2.0 - x;
        let b = a + t;
        let c = CknParams::new(d, a, b).unwrap();
        let p = c.p();
        let df = d as f64;
        let bma = (2.0 * df / p - df + 2.0) / 2.0;
        prop_assert!((bma - (b - a)).abs() < 1e-12);
        prop_assert!(c.alpha() > 0.0 && c.n() > df);
    }

    #[test]
    fn threshold_time_monotone(eps in 0.01f64..0.39, a in 0.0f64..10.0, g in 0.0f64..10.0) {
        let cfg = ThresholdConstants::default();
        let t = threshold_time(3, 0.8, a, g, eps, &cfg).unwrap();
        prop_assert!(threshold_time(3, 0.8, a, g, eps * 0.9, &cfg).unwrap() > t);
        prop_assert!(threshold_time(3, 0.8, a + 1.0, g, eps, &cfg).unwrap() > t);
        prop_assert!(threshold_time(3, 0.8, a, g + 1.0, eps, &cfg).unwrap() > t);
    }

    #[test]
    fn c0_positive(d in 1u32..6, t in 0.01f64..0.99, mass in 0.1f64..10.0) {
        let df = d as f64;
        let lo = ((df - 1.0) / df).max(0.5);
        let m = lo + (1.0 - lo) * t;
        prop_assume!(m > 0.5);
        prop_assert!(renyi_growth_c0(d, m, mass).unwrap() > 0.0);
    }
}
