//! Experiment runners, one per [`Kind`].

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use inls_core::dynamics::{
    action_lambda_derivative, classify_initial_data, default_dynamics_grid, instability_family, mass_critical_family,
    stability_experiment_with, Classification, Propagator, Status, StepConfig, Trajectory, WellTag,
};
use inls_core::functionals::{kac_functional, report, Evaluator};
use inls_core::grid::make_grid;
use inls_core::groundstate::{
    action_level_d, default_profile_grid, nehari_project, solve_profile_shooting, GroundState,
};
use inls_core::model::{classify_regime, critical_exponents};
use inls_core::normalized::{minimize_mass_constrained, scaled_normalized_solution};
use inls_core::perturbation::{smooth_radial, DEFAULT_MODES};
use inls_core::{ModelParams, RadialField, RadialGrid};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{category, LabError, LabResult, EXIT_OK};
use crate::io::{fmt_f64, read_field, write_field, write_json, write_table, write_trajectory};
use crate::scenario::{Datum, Expect, GridSpec, Kind, Scenario};

pub const REPORT_FILE: &str = "report.json";
pub const DEFAULT_OMEGAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
/// Node count of the grid for the mass-constrained minimizer.
pub const NORMALIZED_NODES: usize = 8192;
/// Allowed growth of the phase-optimized distance over `ε` in the stability
/// experiment.
pub const STABILITY_MARGIN: f64 = 5.0;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub kind: Kind,
    pub exit_code: i32,
    pub status: &'static str,
    pub message: Option<String>,
    pub scenario: crate::scenario::ScenarioDoc,
    pub results: Value,
    pub files: Vec<String>,
}

/// A kind's output before it is wrapped into a [`Report`].
struct Outcome {
    results: Value,
    failure: Option<LabError>,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Outcome { results, failure: None }
    }

    fn checked(results: Value, failures: Vec<String>) -> Self {
        let failure = (!failures.is_empty()).then(|| LabError::Check(failures.join("; ")));
        Outcome { results, failure }
    }
}

struct Ctx<'a> {
    s: &'a Scenario,
    files: Vec<String>,
}

impl Ctx<'_> {
    fn path(&mut self, file: &str) -> PathBuf {
        self.files.push(file.to_string());
        self.s.out.join(file)
    }
}

/// Runs `s`, writes its artifacts and `report.json` into `s.out`.
///
/// Errors that stop the run before any result exists are returned as `Err`;
/// failed checks and unmet expectations produce a report with a non-zero
/// exit code.
pub fn run_scenario(s: &Scenario) -> LabResult<Report> {
    fs::create_dir_all(&s.out).map_err(|e| LabError::io(&s.out, e))?;
    let mut ctx = Ctx { s, files: Vec::new() };
    let outcome = match s.kind {
        Kind::GroundState => ground_state(&mut ctx),
        Kind::Identities => identities(&mut ctx),
        Kind::DOmegaSweep => d_omega_sweep(&mut ctx),
        Kind::Classify => classify(&mut ctx),
        Kind::Evolve => evolve(&mut ctx),
        Kind::Stability => stability(&mut ctx),
        Kind::Instability => instability(&mut ctx),
        Kind::MassCritical => mass_critical(&mut ctx),
        Kind::Normalized => normalized(&mut ctx),
        Kind::MCSweep => m_c_sweep(&mut ctx),
    }?;
    let exit_code = outcome.failure.as_ref().map_or(EXIT_OK, LabError::exit_code);
    let mut files = ctx.files;
    files.push(REPORT_FILE.to_string());
    let report = Report {
        name: s.name.clone(),
        kind: s.kind,
        exit_code,
        status: category(exit_code),
        message: outcome.failure.map(|e| e.to_string()),
        scenario: s.to_doc(),
        results: outcome.results,
        files,
    };
    write_json(&s.out.join(REPORT_FILE), &report)?;
    Ok(report)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn grid_json(g: &RadialGrid) -> Value {
    json!({ "radius": g.radius(), "nodes": g.len() })
}

fn params_json(p: &ModelParams) -> Value {
    json!({
        "dim": p.dim,
        "b": p.b(),
        "p": p.p(),
        "omega": p.omega,
        "regime": classify_regime(p).to_string(),
        "exponents": critical_exponents(p).ok(),
    })
}

fn grid_or(
    spec: Option<GridSpec>,
    dim: u32,
    default: impl FnOnce() -> inls_core::Result<Arc<RadialGrid>>,
) -> LabResult<Arc<RadialGrid>> {
    Ok(match spec {
        Some(g) => make_grid(dim, g.radius, g.nodes)?,
        None => default()?,
    })
}

/// Ground state at the scenario frequency on the scenario grid, or on the
/// default profile grid.
fn profile_ground_state(s: &Scenario) -> LabResult<GroundState> {
    let omega = s.params.omega()?;
    let grid = grid_or(s.grid, s.params.dim, || default_profile_grid(s.params.dim, omega))?;
    Ok(solve_profile_shooting(&s.params, grid)?)
}

/// Ground state on the grid used for time evolution.
fn dynamics_ground_state(s: &Scenario) -> LabResult<GroundState> {
    let omega = s.params.omega()?;
    let grid = grid_or(s.grid, s.params.dim, || default_dynamics_grid(s.params.dim, omega))?;
    Ok(solve_profile_shooting(&s.params, grid)?)
}

fn ground_state_json(q: &GroundState) -> Value {
    json!({
        "omega": q.omega,
        "residual": q.residual,
        "pohozaev": q.pohozaev.as_array(),
        "pohozaev_detail": q.pohozaev,
        "action_value": q.action_value,
        "center_value": q.center_value,
        "boundary_value": q.profile.boundary_value(),
        "functionals": q.functionals,
        "grid": grid_json(q.grid()),
    })
}

fn ground_state(ctx: &mut Ctx) -> LabResult<Outcome> {
    let q = profile_ground_state(ctx.s)?;
    write_field(&ctx.path("profile.csv"), &q.profile)?;
    let mut failures = Vec::new();
    if q.pohozaev.max() > 1e-6 {
        failures.push(format!("Pohozaev residual {:e} above 1e-6", q.pohozaev.max()));
    }
    let results = json!({ "params": params_json(&q.params), "ground_state": ground_state_json(&q) });
    Ok(Outcome::checked(results, failures))
}

struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
}

fn checks_json(checks: &[Check]) -> (Value, Vec<String>) {
    let failures = checks
        .iter()
        .filter(|c| !(c.value <= c.tol))
        .map(|c| format!("{} {:e} above {:e}", c.name, c.value, c.tol))
        .collect();
    let map: serde_json::Map<String, Value> = checks
        .iter()
        .map(|c| (c.name.to_string(), json!({ "value": c.value, "tol": c.tol, "pass": c.value <= c.tol })))
        .collect();
    (Value::Object(map), failures)
}

fn identities(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let q = profile_ground_state(s)?;
    let params = q.params;
    let (n, p, omega) = (params.n(), params.p(), q.omega);
    let count = s.settings.fields.unwrap_or(20);
    let seed = s.seed.unwrap_or(0);
    let (mut kac, mut split, mut nehari) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..count as u64 {
        let w = smooth_radial(q.grid().clone(), seed.wrapping_add(k), DEFAULT_MODES)?.scale_real(1.0 + k as f64);
        let r = report(&w, &params)?;
        kac = kac.max(rel(kac_functional(&w, &params, 1.0, -2.0 / n)?, 2.0 / n * r.virial));
        split = split.max(rel(r.action, r.energy + 0.5 * omega * r.mass));
        let (_, projected) = nehari_project(&w, &params)?;
        let rp = report(&projected, &params)?;
        nehari = nehari.max(rel(rp.action, (p - 1.0) / (2.0 * (p + 1.0)) * rp.potential));
    }
    let f = &q.functionals;
    let checks = [
        Check { name: "kac_virial", value: kac, tol: 1e-12 },
        Check { name: "action_split", value: split, tol: 1e-12 },
        Check { name: "nehari_projection", value: nehari, tol: 1e-10 },
        Check { name: "ground_state_nehari", value: f.nehari.abs() / (f.kinetic + omega * f.mass), tol: 1e-8 },
        Check { name: "pohozaev", value: q.pohozaev.max(), tol: 1e-6 },
    ];
    let (checks_value, failures) = checks_json(&checks);
    let results = json!({
        "params": params_json(&params),
        "fields": count,
        "seed": seed,
        "checks": checks_value,
        "ground_state": ground_state_json(&q),
    });
    Ok(Outcome::checked(results, failures))
}

fn d_omega_sweep(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let base = s.params.with_omega(1.0);
    let grid = grid_or(s.grid, base.dim, || default_profile_grid(base.dim, 1.0))?;
    let q1 = solve_profile_shooting(&base, grid)?;
    let mut omegas = s.settings.omegas.clone().unwrap_or_else(|| DEFAULT_OMEGAS.to_vec());
    omegas.sort_by(f64::total_cmp);
    let rows: Vec<(f64, f64, f64)> = omegas
        .par_iter()
        .map(|&w| action_level_d(&base.with_omega(w), &q1).map(|(d, closed)| (w, d, closed)))
        .collect::<inls_core::Result<_>>()?;
    let table: Vec<Vec<String>> =
        rows.iter().map(|&(w, d, c)| vec![fmt_f64(w), fmt_f64(d), fmt_f64(c), fmt_f64(rel(d, c))]).collect();
    write_table(&ctx.path("d_omega.csv"), &["omega", "d_numeric", "d_closed_form", "rel_diff"], &table)?;
    let worst = rows.iter().map(|&(_, d, c)| rel(d, c)).fold(0.0, f64::max);
    let positive = rows.iter().all(|r| r.1 > 0.0);
    let convex = (rows.len() >= 3).then(|| {
        rows.windows(3).all(|w| {
            let left = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let right = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            right > left
        })
    });
    let (checks, failures) = checks_json(&[Check { name: "closed_form", value: worst, tol: 1e-6 }]);
    let results = json!({
        "params": params_json(&base),
        "rows": rows.len(),
        "max_rel_diff": worst,
        "positive": positive,
        "convex": convex,
        "checks": checks,
    });
    Ok(Outcome::checked(results, failures))
}

fn classification_json(c: &Classification) -> Value {
    serde_json::to_value(c).unwrap_or(Value::Null)
}

fn classify(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let input = s.settings.input.as_ref().ok_or_else(|| LabError::Invalid("classify needs --input".into()))?;
    let u = read_field(input, s.params.dim)?;
    let q = profile_ground_state(s)?;
    let c = classify_initial_data(&u, &s.params, q.action_value)?;
    let r = report(&u, &s.params)?;
    let results = json!({
        "params": params_json(&s.params),
        "input": input,
        "grid": grid_json(u.grid()),
        "tag": c.tag,
        "classification": classification_json(&c),
        "functionals": r,
        "boundary_value": u.boundary_value(),
    });
    Ok(Outcome::ok(results))
}

fn step_config(s: &Scenario) -> StepConfig {
    match s.settings.dt {
        Some(dt) => StepConfig::fixed(dt),
        None => {
            let mut c = StepConfig::default();
            if let Some(m) = s.settings.dt_max {
                c.dt_max = m;
                c.dt_initial = c.dt_initial.min(m);
            }
            c
        }
    }
}

fn trajectory_json(traj: &Trajectory) -> Value {
    let (mass_drift, energy_drift) = traj.drift();
    let max = |f: fn(&inls_core::dynamics::Sample) -> f64| traj.samples.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    json!({
        "status": traj.status,
        "blowup_time": traj.blowup_time,
        "final_time": traj.final_state.t,
        "steps": traj.final_state.steps,
        "halvings": traj.final_state.halvings,
        "samples": traj.samples.len(),
        "mass_drift": mass_drift,
        "energy_drift": energy_drift,
        "max_kinetic": max(|s| s.kinetic),
        "max_variance": max(|s| s.variance),
        "max_distance": traj.max_distance(),
    })
}

/// Exit status of a finished run against the scenario expectation.
fn expectation(traj: &Trajectory, expect: Option<Expect>) -> Option<LabError> {
    match (traj.status, expect) {
        (Status::StepCollapse, _) => Some(LabError::Check(format!(
            "time step collapsed at t = {} without the blow-up signature",
            traj.final_state.t
        ))),
        (Status::BlowupDetected, Some(Expect::Global)) => Some(LabError::Expectation(format!(
            "blow-up detected at t = {} but global existence was expected",
            traj.final_state.t
        ))),
        (Status::Finished, Some(Expect::Blowup)) => {
            Some(LabError::Expectation(format!("ran to T = {} without blow-up", traj.final_state.t)))
        }
        _ => None,
    }
}

/// `‖∇u(t)‖² ≤ (2B/(B−2))·E(u₀)` for `K⁺` data when `B > 2`.
fn kinetic_bound(params: &ModelParams, c: &Classification, energy0: f64) -> Option<f64> {
    let big_b = params.virial_exponent();
    (c.tag == WellTag::KPlus && big_b > 2.0).then(|| 2.0 * big_b / (big_b - 2.0) * energy0)
}

fn evolve(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let st = &s.settings;
    let amplitude = st.amplitude.unwrap_or(1.0);
    let datum = if st.input.is_some() { None } else { Some(st.datum.unwrap_or(Datum::Gaussian)) };
    let (u0, q, reference) = match datum {
        None => {
            let u = read_field(st.input.as_ref().unwrap(), s.params.dim)?.scale_real(amplitude);
            (u, profile_ground_state(s)?, false)
        }
        Some(Datum::Gaussian) => {
            let omega = s.params.omega()?;
            let grid = grid_or(s.grid, s.params.dim, || default_dynamics_grid(s.params.dim, omega))?;
            let u = RadialField::from_real_fn(grid, |r| amplitude * (-r * r / 2.0).exp())?;
            (u, profile_ground_state(s)?, false)
        }
        Some(Datum::GroundState) => {
            let q = dynamics_ground_state(s)?;
            (q.profile.scale_real(amplitude), q, true)
        }
        Some(Datum::Instability) => {
            let q = dynamics_ground_state(s)?;
            let u = instability_family(&q, st.lambda.unwrap_or(0.2))?.scale_real(amplitude);
            (u, q, false)
        }
    };
    let c = classify_initial_data(&u0, &s.params, q.action_value)?;
    let e0 = Evaluator::new(u0.grid().clone(), &s.params)?.energy(u0.values());
    let prop = Propagator::new(u0.grid().clone(), &s.params, step_config(s))?;
    let traj =
        prop.evolve(u0, st.t_final.unwrap_or(10.0), st.sample_dt.unwrap_or(0.05), reference.then_some(&q.profile))?;
    write_trajectory(&ctx.path("trajectory.csv"), &traj)?;
    let bound = kinetic_bound(&s.params, &c, e0);
    let mut results = json!({
        "params": params_json(&s.params),
        "datum": datum,
        "grid": grid_json(prop.evaluator().grid()),
        "classification": classification_json(&c),
        "expect": st.expect,
        "kinetic_bound": bound,
        "trajectory": trajectory_json(&traj),
    });
    if let Some(b) = bound {
        let max_k = traj.samples.iter().map(|x| x.kinetic).fold(0.0, f64::max);
        results["kinetic_bound_holds"] = json!(max_k <= b * (1.0 + 1e-3));
    }
    Ok(Outcome { results, failure: expectation(&traj, st.expect) })
}

fn stability(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let st = &s.settings;
    let q = dynamics_ground_state(s)?;
    let eps = st.epsilon.unwrap_or(1e-2);
    let t_final = st.t_final.unwrap_or(20.0);
    let sample_dt = st.sample_dt.unwrap_or(0.05);
    let seeds: Vec<u64> = match (&st.seeds, s.seed) {
        (Some(v), _) => v.clone(),
        (None, Some(seed)) => vec![seed],
        (None, None) => DEFAULT_SEEDS.to_vec(),
    };
    let config = step_config(s);
    let runs = seeds
        .par_iter()
        .map(|&seed| stability_experiment_with(&q, eps, t_final, seed, sample_dt, config))
        .collect::<inls_core::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (seed, run) in seeds.iter().zip(&runs) {
        write_trajectory(&ctx.path(&format!("trajectory_seed{seed}.csv")), &run.trajectory)?;
        worst = worst.max(run.max_distance);
        rows.push(json!({
            "seed": seed,
            "initial_distance": run.initial_distance,
            "max_distance": run.max_distance,
            "ratio": if eps > 0.0 { json!(run.max_distance / eps) } else { Value::Null },
            "status": run.trajectory.status,
        }));
    }
    let failure = runs
        .iter()
        .find(|r| r.trajectory.status != Status::Finished)
        .map(|r| LabError::Check(format!("perturbed ground state ended with {:?}", r.trajectory.status)));
    let results = json!({
        "params": params_json(&q.params),
        "grid": grid_json(q.grid()),
        "epsilon": eps,
        "t_final": t_final,
        "margin": STABILITY_MARGIN,
        "max_distance": worst,
        "within_margin": worst <= STABILITY_MARGIN * eps,
        "seeds": rows,
    });
    Ok(Outcome { results, failure })
}

fn instability(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let st = &s.settings;
    let lambda = st.lambda.unwrap_or(0.2);
    let delta = st.delta.unwrap_or(1e-4);
    let q = profile_ground_state(s)?;
    let phi = instability_family(&q, lambda)?;
    write_field(&ctx.path("phi_lambda.csv"), &phi)?;
    let c = classify_initial_data(&phi, &q.params, q.action_value)?;
    let action = |l: f64| -> LabResult<f64> { Ok(report(&instability_family(&q, l)?, &q.params)?.action) };
    let fd = |l: f64| -> LabResult<f64> { Ok((action(l + delta)? - action(l - delta)?) / (2.0 * delta)) };
    let fd0 = fd(0.0)?;
    let closed0 = action_lambda_derivative(&q, 0.0);
    let fdl = fd(lambda)?;
    let closedl = action_lambda_derivative(&q, lambda);
    let kinetic = q.functionals.kinetic;
    let err_l = if closedl == 0.0 { (fdl - closedl).abs() / kinetic } else { rel(fdl, closedl) };
    let (checks, failures) = checks_json(&[
        Check { name: "derivative_at_zero", value: (fd0 - closed0).abs() / kinetic, tol: 1e-6 },
        Check { name: "derivative_at_lambda", value: err_l, tol: 1e-6 },
    ]);
    let mut results = json!({
        "params": params_json(&q.params),
        "lambda": lambda,
        "delta": delta,
        "grid": grid_json(phi.grid()),
        "tag": c.tag,
        "classification": classification_json(&c),
        "derivative": {
            "at_zero": { "finite_difference": fd0, "closed_form": closed0 },
            "at_lambda": { "finite_difference": fdl, "closed_form": closedl },
        },
        "checks": checks,
    });
    let mut failure = (!failures.is_empty()).then(|| LabError::Check(failures.join("; ")));
    if let Some(t_final) = st.t_final {
        let qd = dynamics_ground_state(s)?;
        let u0 = instability_family(&qd, lambda)?;
        let prop = Propagator::new(u0.grid().clone(), &qd.params, step_config(s))?;
        let traj = prop.evolve(u0, t_final, st.sample_dt.unwrap_or(0.01), None)?;
        write_trajectory(&ctx.path("trajectory.csv"), &traj)?;
        results["expect"] = json!(st.expect);
        results["trajectory"] = trajectory_json(&traj);
        if failure.is_none() {
            failure = expectation(&traj, st.expect);
        }
    }
    Ok(Outcome { results, failure })
}

fn mass_critical(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let q = profile_ground_state(s)?;
    let lambdas = s.settings.lambdas.clone().unwrap_or_else(|| vec![1.01, 1.1]);
    let fams = lambdas.iter().map(|&l| mass_critical_family(&q, l)).collect::<inls_core::Result<Vec<_>>>()?;
    let header = [
        "lambda",
        "mass_ratio",
        "expected_mass_ratio",
        "kinetic_ratio",
        "expected_kinetic_ratio",
        "potential_ratio",
        "expected_potential_ratio",
        "energy",
        "energy_scaled",
        "energy_closed",
    ];
    let rows: Vec<Vec<String>> = fams
        .iter()
        .map(|f| {
            [
                f.lambda,
                f.mass_ratio,
                f.expected_mass_ratio,
                f.kinetic_ratio,
                f.expected_kinetic_ratio,
                f.potential_ratio,
                f.expected_potential_ratio,
                f.energy,
                f.energy_scaled,
                f.energy_closed,
            ]
            .into_iter()
            .map(fmt_f64)
            .collect()
        })
        .collect();
    write_table(&ctx.path("mass_critical.csv"), &header, &rows)?;
    let ratio_error = fams.iter().flat_map(|f| f.ratio_errors()).fold(0.0, f64::max);
    let closed_error = fams.iter().map(|f| f.closed_form_error()).fold(0.0, f64::max);
    let results = json!({
        "params": params_json(&q.params),
        "grid": grid_json(q.grid()),
        "lambdas": lambdas,
        "max_ratio_error": ratio_error,
        "max_closed_form_error": closed_error,
        "energies_negative": fams.iter().all(|f| f.energy < 0.0),
        "ground_state_virial_over_kinetic": q.functionals.virial / q.functionals.kinetic,
    });
    Ok(Outcome::ok(results))
}

struct Normalized {
    c: f64,
    m_c: f64,
    omega_c: f64,
    iterations: usize,
    residual: f64,
    scaled_energy: f64,
    scaled_omega_c: f64,
    mass_error: f64,
    gradient_norm: f64,
    profile: RadialField,
}

fn base_profile(s: &Scenario) -> LabResult<GroundState> {
    let base = s.params.with_omega(1.0);
    Ok(solve_profile_shooting(&base, default_profile_grid(base.dim, 1.0)?)?)
}

fn normalized_at(s: &Scenario, q1: &GroundState, c: f64) -> LabResult<Normalized> {
    let params = s.params.without_omega();
    let scaled = scaled_normalized_solution(c, &params, q1)?;
    let dim = params.dim;
    let grid = grid_or(s.grid, dim, || make_grid(dim, (10.0 / scaled.omega_c.sqrt()).max(12.0), NORMALIZED_NODES))?;
    let init = RadialField::from_real_fn(grid, |r| (-r * r / 4.0).exp())?;
    let sol = minimize_mass_constrained(c, &params, &init)?;
    Ok(Normalized {
        c,
        m_c: sol.energy_value,
        omega_c: sol.omega_c,
        iterations: sol.iterations,
        residual: sol.lagrange_residual,
        scaled_energy: scaled.energy_value,
        scaled_omega_c: scaled.omega_c,
        mass_error: rel(sol.profile.mass(), c),
        gradient_norm: sol.gradient_norm,
        profile: sol.profile,
    })
}

fn normalized_json(n: &Normalized) -> Value {
    json!({
        "c": n.c,
        "m_c": n.m_c,
        "omega_c": n.omega_c,
        "iterations": n.iterations,
        "lagrange_residual": n.residual,
        "gradient_norm": n.gradient_norm,
        "mass_error": n.mass_error,
        "scaled_energy": n.scaled_energy,
        "scaled_omega_c": n.scaled_omega_c,
        "cross_check": rel(n.m_c, n.scaled_energy),
    })
}

fn normalized(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let q1 = base_profile(s)?;
    let c = s.settings.c.unwrap_or_else(|| q1.mass());
    let n = normalized_at(s, &q1, c)?;
    write_field(&ctx.path("profile.csv"), &n.profile)?;
    let (checks, failures) = checks_json(&[
        Check { name: "lagrange_residual", value: n.residual, tol: 1e-5 },
        Check { name: "mass", value: n.mass_error, tol: 1e-8 },
    ]);
    let results = json!({
        "params": params_json(&s.params),
        "grid": grid_json(n.profile.grid()),
        "solution": normalized_json(&n),
        "checks": checks,
    });
    Ok(Outcome::checked(results, failures))
}

/// `c_k = ½·√2^k·‖Q₁‖²`, `k = 0..5`.
pub fn default_ladder(q1_mass: f64) -> Vec<f64> {
    (0..5).map(|k| 0.5 * q1_mass * 2f64.sqrt().powi(k)).collect()
}

fn m_c_sweep(ctx: &mut Ctx) -> LabResult<Outcome> {
    let s = ctx.s;
    let q1 = base_profile(s)?;
    let mut ladder = s.settings.c_ladder.clone().unwrap_or_else(|| default_ladder(q1.mass()));
    ladder.sort_by(f64::total_cmp);
    let sols = ladder.par_iter().map(|&c| normalized_at(s, &q1, c)).collect::<LabResult<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = sols
        .iter()
        .map(|n| vec![fmt_f64(n.c), fmt_f64(n.m_c), fmt_f64(n.omega_c), n.iterations.to_string(), fmt_f64(n.residual)])
        .collect();
    write_table(&ctx.path("m_c.csv"), &["c", "m_c", "omega_c", "iterations", "residual"], &rows)?;
    let m: Vec<f64> = sols.iter().map(|n| n.m_c).collect();
    let k = m.len();
    let results = json!({
        "params": params_json(&s.params),
        "negative": m.iter().all(|&v| v < 0.0),
        "decreasing": m.windows(2).all(|w| w[1] < w[0]),
        "strictly_subadditive": (0..k).all(|i| (i + 1..k).all(|j| m[j] < ladder[j] / ladder[i] * m[i])),
        "max_lagrange_residual": sols.iter().map(|n| n.residual).fold(0.0, f64::max),
        "max_cross_check": sols.iter().map(|n| rel(n.m_c, n.scaled_energy)).fold(0.0, f64::max),
        "rows": sols.iter().map(normalized_json).collect::<Vec<_>>(),
    });
    Ok(Outcome::ok(results))
}
