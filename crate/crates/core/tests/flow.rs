use std::sync::Arc;

use entroflow_core::constants::{threshold_time, ThresholdConstants};
use entroflow_core::flow::*;
use entroflow_core::model::{ProblemParams, RadialGrid, RadialProfile};
use entroflow_core::spectra::Potential;
use entroflow_core::Error;
use proptest::prelude::*;

fn free_grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::log_graded(1200, 300.0, 0.05).unwrap())
}

fn bump_a(params: &ProblemParams) -> RadialProfile {
    let m = params.m();
    RadialProfile::from_fn(free_grid(), params.n(), |r| {
        (1.0 + r * r / 4.0).powf(1.0 / (m - 1.0)) * (1.0 + (-(r - 4.0) * (r - 4.0) / 9.0).exp())
    })
    .unwrap()
}

fn g_nonincreasing(run: &FlowResult) -> bool {
    run.records.windows(2).all(|w| w[1].renyi_power.unwrap() <= w[0].renyi_power.unwrap() * (1.0 + 1e-12))
}

#[test]
fn self_similar_run_keeps_g_constant() {
    let p = ProblemParams::new(3, 0.8).unwrap();
    let u0 = self_similar_datum(&p, free_grid()).unwrap();
    let run = run_free_fd(&u0, &FlowConfig::new(p, 1e-3, 0.3)).unwrap();
    let g0 = run.records[0].renyi_power.unwrap();
    let spread = run.records.iter().map(|r| (r.renyi_power.unwrap() / g0 - 1.0).abs()).fold(0.0, f64::max);
    assert!(spread < 5e-3);
    let id = verify_identity_f(&run).unwrap();
    assert!(id.max_lhs < 1e-5 && id.max_rhs < 1e-5, "{id:?}");
    // the optimal C0 makes the homogeneous reading nearly sharp here
    let h = growth_entropy_check(&run, &p, GrowthReading::Homogeneous).unwrap();
    assert!(h.min_margin >= -1e-12 && h.min_margin_positive_t < 2e-3, "{h:?}");
}

#[test]
fn compact_bump_in_one_dimension() {
    let p = ProblemParams::new(1, 0.75).unwrap();
    let g = Arc::new(RadialGrid::log_graded(800, 1000.0, 0.02).unwrap());
    let u0 = RadialProfile::from_fn(g, 1.0, |r| if r < 1.0 { (1.0 - r * r).powi(2) } else { 0.0 }).unwrap();
    let run = run_free_fd(&u0, &FlowConfig::new(p, 1e-3, 0.5)).unwrap();
    assert!(g_nonincreasing(&run));
    assert!(run.mass_drift() < 1e-9);
    let h = growth_entropy_check(&run, &p, GrowthReading::Homogeneous).unwrap();
    assert!(h.min_margin >= -1e-12, "{h:?}");
}

#[test]
fn identity_converges_at_first_order() {
    let p = ProblemParams::new(3, 0.8).unwrap();
    let u0 = bump_a(&p);
    let coarse = run_free_fd(&u0, &FlowConfig::new(p, 1e-3, 0.3)).unwrap();
    let fine = run_free_fd(&u0, &FlowConfig { record_every: 2, ..FlowConfig::new(p, 5e-4, 0.3) }).unwrap();
    let a = verify_identity_f(&coarse).unwrap();
    let b = verify_identity_f(&fine).unwrap();
    assert!(g_nonincreasing(&coarse) && g_nonincreasing(&fine));
    assert!(a.max_relative < 0.02);
    let ratio = a.max_relative / b.max_relative;
    assert!((1.8..=2.2).contains(&ratio), "{ratio}");
}

#[test]
fn growth_readings_on_a_small_datum() {
    let p = ProblemParams::new(3, 0.8).unwrap();
    let u0 = self_similar_datum(&p, free_grid()).unwrap();
    let small = u0.with_values(u0.values().iter().map(|x| 1e-3 * x).collect()).unwrap();
    let run = run_free_fd(&small, &FlowConfig::new(p, 1e-2, 1.0)).unwrap();
    let h = growth_entropy_check(&run, &p, GrowthReading::Homogeneous).unwrap();
    let a = growth_entropy_check(&run, &p, GrowthReading::AsPrinted).unwrap();
    assert!(run.records[0].entropy.unwrap() < 1.0);
    assert!(h.min_margin >= -1e-12, "{h:?}");
    assert!(a.min_margin < -0.5, "{a:?}");
}

#[test]
fn identity_balances_at_m1() {
    let p = ProblemParams::new(3, 2.0 / 3.0).unwrap();
    let u0 = bump_a(&p);
    let run = run_free_fd(&u0, &FlowConfig::new(p, 1e-3, 0.3)).unwrap();
    let id = verify_identity_f(&run).unwrap();
    assert!(id.max_relative < 0.02, "{id:?}");
    assert!(g_nonincreasing(&run));
}

fn rfd_params() -> ProblemParams {
    ProblemParams::new(3, 0.8).unwrap()
}

fn rfd_data() -> Vec<(&'static str, RadialProfile)> {
    let p = rfd_params();
    let g = Arc::new(RadialGrid::log_graded(800, 60.0, 0.05).unwrap());
    let b = |r: f64| (1.0 + r * r).powf(-5.0);
    let make = |f: &dyn Fn(f64) -> f64| match_barenblatt_mass(&RadialProfile::from_fn(g.clone(), 3.0, f).unwrap(), &p).unwrap();
    vec![
        ("dilated", make(&|r| (1.0 + r * r / 2.25).powf(-5.0))),
        ("bump", make(&|r| b(r) * (1.0 + (-(r - 1.0) * (r - 1.0)).exp()))),
        ("narrow", make(&|r| (1.0 + 4.0 * r * r).powf(-5.0) + 0.3 * b(r))),
        ("oscillating", make(&|r| b(r) * (1.0 + 0.8 * (2.0 * r).cos() * (-r * r / 4.0).exp()))),
        ("wide", make(&|r| (1.0 + r * r / 1.44).powf(-5.0))),
        ("concentrated", make(&|r| (1.0 + 1.5 * r * r).powf(-5.0))),
    ]
}

#[test]
fn barenblatt_is_stationary() {
    let p = rfd_params();
    let g = Arc::new(RadialGrid::log_graded(400, 60.0, 0.05).unwrap());
    let v0 = RadialProfile::from_fn(g, 3.0, |r| (1.0 + r * r).powf(-5.0)).unwrap();
    let run = run_rescaled_fp(&v0, &FlowConfig::new(p, 1e-2, 0.5)).unwrap();
    for r in &run.records {
        assert!(r.rel_entropy.unwrap() < 1e-13 && r.sandwich_eps.unwrap() < 1e-12, "{r:?}");
    }
}

#[test]
fn rescaled_runs() {
    let p = rfd_params();
    let eps = 0.1;
    let consts = ThresholdConstants::default();
    for (name, v0) in rfd_data() {
        let cfg = FlowConfig { target_eps: Some(eps), ..FlowConfig::new(p, 1e-3, 1.5) };
        let run = run_rescaled_fp(&v0, &cfg).unwrap();
        let f0 = run.records[0].rel_entropy.unwrap();
        let worst = run.records.iter().map(|r| r.rel_entropy.unwrap() / (f0 * (-4.0 * r.t).exp())).fold(0.0, f64::max);
        let rate = run.fitted_rates.entropy_decay.unwrap();
        let ode = quotient_ode_check(&run);
        let a = tail_constant(&v0, &p);
        let t_formula = threshold_time(3, 0.8, a, f0, eps, &consts).unwrap();
        let sandwich_up = run.records.windows(2).filter(|w| w[1].sandwich_eps.unwrap() > w[0].sandwich_eps.unwrap() + 1e-6).count();
        assert!(worst <= 1.0 + 1e-12, "{name}: F exceeds F0 e^(-4t) by {worst}");
        assert!(rate >= 3.95, "{name}: rate {rate}");
        if let Ok(ode) = ode {
            assert!(ode.max_excess <= 0.0, "{name}: Q' exceeds Q(Q-4): {ode:?}");
        }
        let t_star = run.empirical_t_star.unwrap();
        assert!(t_star <= t_formula, "{name}: {t_star} > {t_formula}");
        assert_eq!(sandwich_up, 0, "{name}: sandwich eps increased");
        assert!(run.mass_drift() < 1e-9);
        assert_eq!(initial_time_layer_check(&run, 0.25, 1.0), Ok(true), "{name}");
    }
}

#[test]
fn layer_bound_values() {
    // oracle: 4 + 4e^{-1}/(5 - e^{-1})
    let e = (-1.0f64).exp();
    assert!((initial_time_layer_bound(1.0, 0.25) - (4.0 + 4.0 * e / (5.0 - e))).abs() < 1e-14);
    assert!((initial_time_layer_bound(1.0, 0.25) - 4.3176769).abs() < 1e-7);
    assert_eq!(initial_time_layer_bound(0.3, 0.0), 4.3);
}

#[test]
fn layer_check_is_inconclusive_below_the_gap() {
    let p = rfd_params();
    let (_, v0) = rfd_data().remove(0);
    let run = run_rescaled_fp(&v0, &FlowConfig::new(p, 1e-2, 0.5)).unwrap();
    assert!(matches!(initial_time_layer_check(&run, 0.25, 3.0), Err(Error::Inconclusive(_))));
}

#[test]
fn rescaled_flow_rejects_mismatched_mass() {
    let p = rfd_params();
    let (_, v0) = rfd_data().remove(1);
    let heavy = v0.with_values(v0.values().iter().map(|x| 1.1 * x).collect()).unwrap();
    assert!(run_rescaled_fp(&heavy, &FlowConfig::new(p, 1e-2, 0.1)).unwrap_err().is_input_error());
}

#[test]
fn heat_flow_decays_like_nash() {
    let p = ProblemParams::new(1, 0.75).unwrap();
    let cfg = FlowConfig { record_every: 10, ..FlowConfig::new(p, 0.05, 200.0) };
    let run = run_linear(LinearKind::Heat { dim: 1.0 }, &|x| (-x * x).exp(), LinearMesh { cells: 4000, extent: 400.0 }, &cfg).unwrap();
    let k = run.fitted_rates.power_exponent.unwrap();
    assert!((k + 0.5).abs() < 0.01, "{k}");
    assert!(run.mass_drift() < 1e-9);
}

#[test]
fn gaussian_ou_rates() {
    let p = ProblemParams::new(1, 0.75).unwrap();
    let cfg = FlowConfig { scheme: Scheme::Theta(0.5), record_every: 10, ..FlowConfig::new(p, 1e-3, 5.0) };
    let pot = Potential::Harmonic { k: 1.0 };
    let run = run_linear(LinearKind::Ou(pot), &|x| 1.0 + 0.5 * x.tanh(), LinearMesh { cells: 2000, extent: 40.0 }, &cfg).unwrap();
    let var = run.fitted_rates.variance_decay.unwrap();
    let ent = run.fitted_rates.entropy_decay.unwrap();
    assert!((var - 2.0).abs() < 0.02, "{var}");
    assert!((ent - 2.0).abs() < 0.02, "{ent}");
}

#[test]
fn ou_rejects_a_nonconfining_potential() {
    let p = ProblemParams::new(1, 0.75).unwrap();
    let cfg = FlowConfig::new(p, 1e-2, 0.1);
    let pot = Potential::Harmonic { k: -1.0 };
    assert!(run_linear(LinearKind::Ou(pot), &|_| 1.0, LinearMesh { cells: 100, extent: 30.0 }, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn layer_bound_decreases_in_time(eta in 0.01f64..10.0, t in 0.0f64..3.0, dt in 1e-3f64..1.0) {
        let a = initial_time_layer_bound(eta, t);
        let b = initial_time_layer_bound(eta, t + dt);
        prop_assert!(b < a && b > 4.0 && a <= 4.0 + eta + 1e-12);
    }

    #[test]
    fn free_flow_conserves_mass(amp in 0.2f64..5.0, width in 0.3f64..3.0, m in 0.7f64..0.95) {
        let p = ProblemParams::new(3, m).unwrap();
        let g = Arc::new(RadialGrid::log_graded(200, 50.0, 0.05).unwrap());
        let u0 = RadialProfile::from_fn(g, 3.0, |r| amp * (1.0 + r * r / width).powf(1.0 / (m - 1.0))).unwrap();
        let run = run_free_fd(&u0, &FlowConfig::new(p, 1e-2, 0.1)).unwrap();
        prop_assert!(run.mass_drift() < 1e-9);
        prop_assert!(run.final_values.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn rescaled_flow_dissipates(width in 0.5f64..2.0, m in 0.7f64..0.9) {
        let p = ProblemParams::new(3, m).unwrap();
        let g = Arc::new(RadialGrid::log_graded(200, 60.0, 0.05).unwrap());
        let v0 = RadialProfile::from_fn(g, 3.0, |r| (1.0 + r * r / width).powf(1.0 / (m - 1.0))).unwrap();
        let v0 = match_barenblatt_mass(&v0, &p).unwrap();
        let run = run_rescaled_fp(&v0, &FlowConfig::new(p, 1e-2, 0.2)).unwrap();
        prop_assert!(run.mass_drift() < 1e-9);
        for w in run.records.windows(2) {
            prop_assert!(w[1].rel_entropy.unwrap() <= w[0].rel_entropy.unwrap() + 1e-15);
        }
    }
}
