//! One function per subcommand.

use std::path::Path;
use std::sync::Arc;

use entroflow_core::constants::{
    ckn_symmetric_constant, felli_schneider, gns_optimal_constant, renyi_growth_c0, sobolev_constant, sphere_delta,
    sphere_exponents, threshold_eps_window, threshold_time, alpha_fs, CknFamily, ThresholdConstants,
};
use entroflow_core::flow::{
    match_barenblatt_mass, run_free_fd, run_linear, run_rescaled_fp, self_similar_datum, tail_constant, verify_identity_f,
    FlowConfig, FlowResult, LinearKind, LinearMesh, Scheme,
};
use entroflow_core::functionals::{free_diagnostics, gns_stability, heisenberg_check, relative_pair, sandwich_eps};
use entroflow_core::model::{
    aubin_talenti, barenblatt, make_grid, CknParams, OptimizerFamily, ProblemParams, RadialGrid, RadialProfile,
};
use entroflow_core::spectra::{
    bakry_emery_bound, hardy_poincare_spectrum, kappa1_minimize, ou_kappa0, sphere_zonal_spectrum,
    sphere_zonal_spectrum_even, EigenResult, HpMesh, OuMesh, Potential,
};
use entroflow_core::sphere::{bifurcation_points, continue_branch, kappa_p, mu_of_lambda, Branch, StepConfig, Symmetry};
use serde_json::{json, Map, Value};

use crate::cli::*;
use crate::error::{CliError, CliResult};
use crate::format::{json as to_json, num, opt};
use crate::io::{interpolant, profile_csv, read_pairs, read_profile, table};
use crate::sweep::par_map;

pub fn execute(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Constants(a) => constants(a),
        Command::Profile(a) => profile(a),
        Command::Flow(a) => flow(a),
        Command::Spectrum(a) => spectrum(a, cli.seed),
        Command::Branch(a) => branch(a),
        Command::Kappa(a) => kappa(a),
        Command::CknMap(a) => ckn_map(a),
        Command::Check(a) => check(a),
        Command::Reproduce(a) => reproduce(a),
    }
}

fn threshold_constants(t: &ThresholdArgs) -> ThresholdConstants {
    ThresholdConstants { c_star: t.c_star, a_exp: t.a_exp, eps0: t.eps0, chi: t.chi }
}

fn params(d: u32, m: f64, n: Option<f64>) -> CliResult<ProblemParams> {
    let p = ProblemParams::new(d, m)?;
    Ok(match n {
        Some(n) => p.with_dimension(n)?,
        None => p,
    })
}

fn need<T>(x: Option<T>, flag: &str, what: &str) -> CliResult<T> {
    x.ok_or_else(|| CliError::input(format!("--{flag} is required for {what}")))
}

fn constants(a: &ConstantsArgs) -> CliResult<Output> {
    let d = a.d;
    if d == 0 {
        return Err(CliError::input("d must be at least 1"));
    }
    let df = d as f64;
    let mut o = Map::new();
    o.insert("d".into(), json!(d));
    o.insert("m1".into(), json!((df - 1.0) / df));
    o.insert("mc".into(), json!((df - 2.0) / df));
    if d >= 3 {
        o.insert("S_d".into(), json!(sobolev_constant(d)?));
        o.insert("p_star".into(), json!(df / (df - 2.0)));
        o.insert("two_star".into(), json!(2.0 * df / (df - 2.0)));
    }
    if let Some(p) = a.p {
        let e = sphere_exponents(d, p)?;
        o.insert("two_sharp".into(), if e.two_sharp.is_finite() { json!(e.two_sharp) } else { json!("inf") });
        o.insert("gamma_p".into(), json!(e.gamma_p));
        o.insert("theta".into(), json!(e.theta));
        if d < 3 || p <= df / (df - 2.0) {
            o.insert("C_GNS".into(), json!(gns_optimal_constant(d, p)?));
        }
        if let Some(m) = a.m {
            o.insert("delta".into(), json!(sphere_delta(d, p, m)?));
        }
    }
    if let Some(m) = a.m {
        if m > 0.5 && m < 1.0 && m >= (df - 1.0) / df {
            o.insert("C0".into(), json!(renyi_growth_c0(d, m, a.mass)?));
        }
        let cfg = threshold_constants(&a.threshold);
        o.insert("eps_window".into(), json!(threshold_eps_window(d, m, &cfg)));
        if let Some(eps) = a.eps {
            let t = threshold_time(d, m, a.a_tail.unwrap_or(1.0), a.g.unwrap_or(1.0), eps, &cfg)?;
            o.insert("T_star".into(), json!(t));
        }
    }
    if let Some(n) = a.n {
        o.insert("alpha_FS".into(), json!(alpha_fs(d, n)?));
    }
    if let (Some(ca), Some(cb)) = (a.a, a.b) {
        let c = CknParams::new(d, ca, cb)?;
        let v = felli_schneider(CknFamily::Critical(c));
        o.insert("b_FS".into(), json!(v.boundary_value));
        o.insert("region".into(), json!(v.region.as_str()));
        o.insert("margin".into(), json!(v.margin));
        o.insert("ckn_p".into(), json!(c.p()));
        o.insert("ckn_n".into(), json!(c.n()));
        o.insert("ckn_alpha".into(), json!(c.alpha()));
        if d >= 2 {
            o.insert("alpha_FS".into(), json!(alpha_fs(d, c.n())?));
        }
        if v.region == entroflow_core::constants::Region::Symmetry && c.p() > 2.0 {
            let k = ckn_symmetric_constant(&c)?;
            o.insert("C_ab".into(), json!(k.quadrature_value));
            o.insert("C_ab_formula".into(), json!(k.formula_value));
            o.insert("C_ab_formula_reliable".into(), json!(k.formula_reliable));
        }
    } else if a.a.is_some() || a.b.is_some() {
        return Err(CliError::input("--a and --b go together"));
    }
    Ok(Output::to(a.out.as_deref(), to_json(&Value::Object(o)) + "\n"))
}

fn profile(a: &ProfileArgs) -> CliResult<Output> {
    let grid = Arc::new(make_grid(a.nodes, a.r_max, a.stretch)?);
    let prof = match a.kind {
        ProfileKind::Barenblatt => {
            let mut p = params(a.d, need(a.m, "m", "a Barenblatt profile")?, a.n)?;
            if let Some(mass) = a.mass {
                p = p.with_mass(mass)?;
            }
            barenblatt(&p, grid)?
        }
        ProfileKind::SelfSimilar => self_similar_datum(&params(a.d, need(a.m, "m", "a self-similar profile")?, a.n)?, grid)?,
        ProfileKind::Sobolev => aubin_talenti(grid, OptimizerFamily::Sobolev { d: a.d })?,
        ProfileKind::Gns => aubin_talenti(grid, OptimizerFamily::Gns { d: a.d, p: need(a.p, "p", "a GNS optimizer")? })?,
        ProfileKind::Ckn => {
            let c = CknParams::new(a.d, need(a.a, "a", "a CKN optimizer")?, need(a.b, "b", "a CKN optimizer")?)?;
            aubin_talenti(grid, OptimizerFamily::Ckn(c))?
        }
    };
    Ok(Output::to(a.out.as_deref(), profile_csv(&prof)))
}

fn potential(p: PotentialName) -> Potential {
    match p {
        PotentialName::Harmonic => Potential::Harmonic { k: 1.0 },
        PotentialName::DoubleWell => Potential::DoubleWell,
        PotentialName::Quartic => Potential::Quartic,
    }
}

fn flow_csv(run: &FlowResult) -> String {
    let rows = run.records.iter().map(|r| {
        vec![
            num(r.t),
            num(r.mass),
            opt(r.entropy),
            opt(r.rel_entropy),
            opt(r.fisher_free),
            opt(r.fisher_rel),
            opt(r.quotient),
            opt(r.renyi_power),
            opt(r.sandwich_eps),
        ]
    });
    table(&["t", "mass", "E", "F", "I_free", "I_rel", "Q", "G", "sandwich_eps"], rows)
}

fn radial_datum(path: Option<&Path>, dim: f64, default: impl FnOnce() -> CliResult<RadialProfile>) -> CliResult<RadialProfile> {
    match path {
        Some(p) => read_profile(p, dim),
        None => default(),
    }
}

fn flow(a: &FlowArgs) -> CliResult<Output> {
    let kind_params = match a.kind {
        FlowKind::Heat | FlowKind::Ou => ProblemParams::new(a.d.max(1), 0.8f64.max((a.d as f64 - 1.0) / a.d.max(1) as f64))?,
        _ => params(a.d, a.m, a.n)?,
    };
    let cfg = FlowConfig {
        scheme: if a.theta == 1.0 { Scheme::ImplicitEuler } else { Scheme::Theta(a.theta) },
        record_every: a.record_every,
        target_eps: a.eps,
        ..FlowConfig::new(kind_params, a.dt, a.t_end)
    };
    let mut summary = Map::new();
    let run = match a.kind {
        FlowKind::Fd => {
            let p = cfg.params;
            let m = p.m();
            let u0 = radial_datum(a.datum.as_deref(), p.n(), || {
                let g = Arc::new(RadialGrid::log_graded(a.nodes.unwrap_or(1200), a.r_max.unwrap_or(300.0), 0.05)?);
                Ok(RadialProfile::from_fn(g, p.n(), |r| {
                    (1.0 + r * r / 4.0).powf(1.0 / (m - 1.0)) * (1.0 + (-(r - 4.0) * (r - 4.0) / 9.0).exp())
                })?)
            })?;
            let run = run_free_fd(&u0, &cfg)?;
            if run.clipped > 0 {
                log::warn!("{} nodal values raised to the 1e-300 floor", run.clipped);
            }
            if let Ok(id) = verify_identity_f(&run) {
                summary.insert("identity_max_relative".into(), json!(id.max_relative));
            }
            run
        }
        FlowKind::Rfd => {
            let p = cfg.params;
            let m = p.m();
            let v0 = radial_datum(a.datum.as_deref(), p.n(), || {
                let g = Arc::new(RadialGrid::log_graded(a.nodes.unwrap_or(800), a.r_max.unwrap_or(60.0), 0.05)?);
                Ok(RadialProfile::from_fn(g, p.n(), |r| (1.0 + r * r / 2.25).powf(1.0 / (m - 1.0)))?)
            })?;
            let v0 = match_barenblatt_mass(&v0, &p)?;
            let run = run_rescaled_fp(&v0, &cfg)?;
            if let Some(eps) = a.eps {
                let a_tail = tail_constant(&v0, &p);
                let g = run.records[0].rel_entropy.unwrap_or(0.0);
                let t = threshold_time(p.d(), m, a_tail, g, eps, &threshold_constants(&a.threshold))?;
                summary.insert("tail_constant".into(), json!(a_tail));
                summary.insert("threshold_time".into(), json!(t));
            }
            run
        }
        FlowKind::Heat | FlowKind::Ou => {
            let (kind, mesh, w0): (_, _, Box<dyn Fn(f64) -> f64>) = match a.kind {
                FlowKind::Heat => (
                    LinearKind::Heat { dim: a.n.unwrap_or(a.d as f64) },
                    LinearMesh { cells: a.nodes.unwrap_or(4000), extent: a.r_max.unwrap_or(400.0) },
                    Box::new(|x: f64| (-x * x).exp()),
                ),
                _ => (
                    LinearKind::Ou(potential(a.potential)),
                    LinearMesh { cells: a.nodes.unwrap_or(2000), extent: a.r_max.unwrap_or(40.0) },
                    Box::new(|x: f64| 1.0 + 0.5 * x.tanh()),
                ),
            };
            let w0 = match &a.datum {
                Some(path) => {
                    let (x, y) = read_pairs(path)?;
                    if x.len() < 2 || x.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(CliError::input("datum abscissae must be strictly increasing"));
                    }
                    Box::new(interpolant(x, y))
                }
                None => w0,
            };
            run_linear(kind, &*w0, mesh, &cfg)?
        }
    };
    let fr = &run.fitted_rates;
    summary.insert("mass_drift".into(), json!(run.mass_drift()));
    summary.insert("clipped".into(), json!(run.clipped));
    summary.insert("empirical_t_star".into(), json!(run.empirical_t_star));
    summary.insert(
        "fitted_rates".into(),
        json!({
            "entropy_decay": fr.entropy_decay,
            "fisher_decay": fr.fisher_decay,
            "variance_decay": fr.variance_decay,
            "power_exponent": fr.power_exponent,
        }),
    );
    let mut out = Output::to(a.out.as_deref(), flow_csv(&run));
    if let Some(path) = &a.summary {
        out.files.push((path.clone(), to_json(&Value::Object(summary)) + "\n"));
    }
    Ok(out)
}

fn eigen_json(e: &EigenResult, gap: f64) -> Value {
    json!({
        "eigenvalues": e.eigenvalues,
        "gap": gap,
        "constraints": e.constraints,
        "mesh_size": e.mesh_size,
    })
}

fn spectrum(a: &SpectrumArgs, seed: u64) -> CliResult<Output> {
    let v = match a.operator {
        Operator::Hp => {
            let mesh = HpMesh { cells: a.mesh.unwrap_or(HpMesh::default().cells), ..HpMesh::default() };
            let e = hardy_poincare_spectrum(a.d, a.m, a.level, mesh)?;
            eigen_json(&e, e.richardson_estimate)
        }
        Operator::Sphere => {
            let mesh = a.mesh.unwrap_or(128);
            let e = if a.even {
                sphere_zonal_spectrum_even(a.d, a.modes, mesh)?
            } else {
                sphere_zonal_spectrum(a.d, a.modes, mesh)?
            };
            eigen_json(&e, e.eigenvalues[0])
        }
        Operator::Ou => {
            let pot = potential(a.potential);
            let phi = move |x: f64| pot.value(x);
            let mesh = OuMesh { cells: a.mesh.unwrap_or(OuMesh::default().cells), ..OuMesh::default() };
            let k0 = ou_kappa0(&phi, mesh)?;
            let mut o = json!({
                "eigenvalues": [k0],
                "gap": k0,
                "constraints": ["int h dmu = 0"],
                "mesh_size": mesh.cells,
                "bakry_emery": bakry_emery_bound(&phi, mesh)?,
            });
            if let Some(p) = a.p {
                let k1 = kappa1_minimize(&phi, p, mesh, seed)?;
                o["kappa1"] = json!(k1.value);
                o["kappa1_deviation"] = json!(k1.deviation);
            }
            o
        }
    };
    Ok(Output::to(a.out.as_deref(), to_json(&v) + "\n"))
}

fn branch_csv(b: &Branch) -> String {
    let rows = b.points.iter().map(|pt| vec![num(pt.arclength), num(pt.lambda), num(pt.mu), pt.jacobian_signature.to_string()]);
    table(&["arclength", "lambda", "mu", "signature"], rows)
}

fn profiles_csv(b: &Branch) -> String {
    let rows = b.points.iter().flat_map(|pt| {
        b.profile_nodes.iter().zip(&pt.profile).map(move |(z, u)| vec![num(pt.arclength), num(*z), num(*u)])
    });
    table(&["arclength", "z", "u"], rows)
}

fn run_branch(d: u32, p: f64, l: u32, direction: f64, cfg: &StepConfig) -> CliResult<Branch> {
    let b = continue_branch(l, d, p, direction, cfg)?;
    if let Some(why) = &b.truncated {
        log::info!("branch l = {l} ended early: {why}");
    }
    Ok(b)
}

fn branch(a: &BranchArgs) -> CliResult<Output> {
    let lam_l = (a.l * (a.l + a.d - 1)) as f64;
    let cfg = StepConfig {
        nodes: a.nodes,
        max_steps: a.max_steps,
        lambda_max: a.lambda_max.unwrap_or(3.0 * lam_l),
        ..StepConfig::default()
    };
    let b = run_branch(a.d, a.p, a.l, a.direction, &cfg)?;
    let mut out = Output::to(a.out.as_deref(), branch_csv(&b));
    if let Some(path) = &a.profiles {
        out.files.push((path.clone(), profiles_csv(&b)));
    }
    Ok(out)
}

fn kappa_table(d: u32, ps: &[f64], cfg: &StepConfig) -> CliResult<Vec<f64>> {
    par_map(ps, |p| kappa_p(d, *p, cfg))?.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

fn kappa_csv(ps: &[f64], ks: &[f64]) -> String {
    table(&["p", "kappa_p"], ps.iter().zip(ks).map(|(p, k)| vec![num(*p), num(*k)]))
}

fn kappa(a: &KappaArgs) -> CliResult<Output> {
    let cfg = StepConfig { nodes: a.nodes, ..StepConfig::default() };
    let ks = kappa_table(a.d, &a.p, &cfg)?;
    Ok(Output::to(a.out.as_deref(), kappa_csv(&a.p, &ks)))
}

fn ckn_map(a: &CknMapArgs) -> CliResult<Output> {
    if a.a_steps < 1 || a.b_steps < 1 || !(a.a_max >= a.a_min && a.b_max >= a.b_min) {
        return Err(CliError::input("empty (a, b) rectangle"));
    }
    let lin = |lo: f64, hi: f64, n: usize, i: usize| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    let pts: Vec<(f64, f64)> = (0..a.a_steps)
        .flat_map(|i| (0..a.b_steps).map(move |j| (i, j)))
        .map(|(i, j)| (lin(a.a_min, a.a_max, a.a_steps, i), lin(a.b_min, a.b_max, a.b_steps, j)))
        .collect();
    let d = a.d;
    let rows = par_map(&pts, |&(ca, cb)| {
        let v = felli_schneider(CknFamily::Critical(CknParams { d, a: ca, b: cb }));
        vec![num(ca), num(cb), v.region.as_str().to_string(), num(v.boundary_value), num(v.margin)]
    })?;
    Ok(Output::to(a.out.as_deref(), table(&["a", "b", "region", "b_fs", "margin"], rows)))
}

fn check(a: &CheckArgs) -> CliResult<Output> {
    let v = match a.functional {
        Functional::Free | Functional::Relative => {
            let p = params(a.d, need(a.m, "m", "this functional")?, a.n)?;
            let f = read_profile(&a.profile, p.n())?;
            if a.functional == Functional::Free {
                let r = free_diagnostics(&f, &p)?;
                json!({"mass": r.mass, "E": r.entropy, "I_free": r.fisher_free, "G": r.renyi_power})
            } else {
                let f = match_barenblatt_mass(&f, &p)?;
                if f.values().iter().any(|x| *x <= 0.0) {
                    return Err(CliError::input("relative functionals need a positive profile"));
                }
                let r = relative_pair(&f, &p)?;
                json!({"F": r.f, "I_rel": r.i, "Q": r.q, "sandwich_eps": sandwich_eps(&f, p.m())})
            }
        }
        Functional::Stability => {
            let p = ProblemParams::from_p(a.d, need(a.p, "p", "the stability report")?)?;
            let f = read_profile(&a.profile, a.d as f64)?;
            let r = gns_stability(&f, &p)?;
            json!({
                "deficit": r.deficit,
                "rel_entropy": r.rel_entropy,
                "fisher_distance": r.fisher_distance,
                "fisher_bound": r.fisher_bound,
                "pck_lower": r.pck_lower,
                "best_match": {
                    "amplitude": r.best_match.amplitude,
                    "scale": r.best_match.scale,
                    "mass": r.best_match.mass,
                    "second_moment": r.best_match.second_moment,
                },
            })
        }
        Functional::Heisenberg => {
            let f = read_profile(&a.profile, a.d as f64)?;
            let (lhs, rhs) = heisenberg_check(&f, need(a.p, "p", "the Heisenberg check")?)?;
            json!({"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs})
        }
    };
    Ok(Output::to(a.out.as_deref(), to_json(&v) + "\n"))
}

/// p values of the κ_p curve.
pub const FIG3_P: [f64; 6] = [1.0, 2.5, 2.8, 3.0, 3.2, 10.0 / 3.0];

fn reproduce(a: &ReproduceArgs) -> CliResult<Output> {
    let dir = &a.out_dir;
    let mut out = Output::default();
    let mut put = |name: &str, text: String| out.files.push((dir.join(name), text));
    let summary = match a.figure {
        Figure::Fig1 => {
            let (d, p) = (3, 3.0);
            let cfg = StepConfig { lambda_max: 8.0, ..StepConfig::default() };
            let bif = bifurcation_points(d, p, 7.0, Symmetry::None, &cfg)?;
            let b = run_branch(d, p, 1, 1.0, &cfg)?;
            let grid: Vec<f64> = (1..=24).map(|i| 0.25 * i as f64).collect();
            let mu = mu_of_lambda(d, p, &grid, &cfg)?;
            put("branch_l1.csv", branch_csv(&b));
            put("mu_curve.csv", table(&["lambda", "mu"], mu.lambda.iter().zip(&mu.mu).map(|(l, m)| vec![num(*l), num(*m)])));
            json!({
                "figure": "fig1", "d": d, "p": p,
                "bifurcation_points": bif,
                "bifurcation_lambda": bif.first(),
                "mu_below_lambda_above_d": mu.lambda.iter().zip(&mu.mu).filter(|(l, _)| **l > 3.0).all(|(l, m)| m < l),
                "certified_minimum": mu.certified,
            })
        }
        Figure::Fig2 => {
            let (d, p) = (5, 10.0 / 3.0);
            let cfg = StepConfig::default();
            let bif = bifurcation_points(d, p, 13.0, Symmetry::None, &cfg)?;
            let b1 = run_branch(d, p, 1, 1.0, &StepConfig { lambda_max: 15.0, ..cfg })?;
            let b2 = run_branch(d, p, 2, 1.0, &StepConfig { lambda_min: 1.0, lambda_max: 40.0, ..cfg })?;
            let lam: Vec<f64> = b2.points.iter().map(|q| q.lambda).collect();
            let turning = lam.windows(3).any(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0);
            put("branch_l1.csv", branch_csv(&b1));
            put("branch_l2.csv", branch_csv(&b2));
            json!({"figure": "fig2", "d": d, "p": p, "bifurcation_points": bif, "l2_turning_point": turning})
        }
        Figure::Fig3 => {
            let d = 5;
            let ks = kappa_table(d, &FIG3_P, &StepConfig::default())?;
            put("kappa.csv", kappa_csv(&FIG3_P, &ks));
            json!({
                "figure": "fig3", "d": d,
                "kappa_10_3": ks[FIG3_P.len() - 1],
                "kappa_1": ks[0],
                "conjectured_limit": 2f64.powf(0.4) * 5.0,
            })
        }
    };
    put("summary.json", to_json(&summary) + "\n");
    Ok(out)
}
