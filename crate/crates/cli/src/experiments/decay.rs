//! Decay of states prepared on the plateau.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use qstep::gamow::{solve_mode, PlateauSpec, SolverConfig};
use qstep::metastable::{
    build_metastable, decay_experiment, decay_grid, off_plateau_scaling, superposition_experiment, superposition_grid,
    SuperpositionRun, SuperpositionSpec, DISCREPANCY_THRESHOLD,
};
use qstep::tdse::{PropagatorConfig, Stencil};

use super::{physical, unit_params};
use crate::output::{Check, Outcome, Table};
use crate::params::{config_error, float, floats, int, ints, ParamSpec, Params};

fn stencil(p: &Params) -> anyhow::Result<Stencil> {
    let order = p.i64("stencil_order");
    Stencil::from_order(order.max(0) as usize)
        .map_err(|_| config_error(format!("`stencil_order` must be 2, 4 or 6, got {order}")))
}

fn plateau(p: &Params) -> anyhow::Result<PlateauSpec> {
    Ok(PlateauSpec::from_alpha(
        p.positive("alpha")?,
        p.positive("a")?,
        physical(p)?,
    )?)
}

pub fn decay_params() -> Vec<ParamSpec> {
    let mut p = vec![
        float("alpha", 40.0, "Plateau width 2a/lambda0"),
        int("n", 1, "Mode index"),
        float("a", 1.0, "Plateau half-width"),
        float(
            "sigma_over_a",
            1.0,
            "Width of the Gaussian cut-off outside the plateau, in units of a",
        ),
        float(
            "horizon_over_tau",
            1.0,
            "Run length in units of the lifetime (at most 1)",
        ),
        int("points_per_a", 560, "Grid points per plateau half-width"),
        float("dt", 0.02, "Largest time step"),
        int("samples", 40, "Sampling instants after t = 0"),
        int("stencil_order", 6, "Order of the second-derivative stencil (2, 4 or 6)"),
        floats(
            "scaling_alphas",
            &[20.0, 40.0, 80.0],
            "alpha values for the off-plateau scaling",
        ),
    ];
    p.extend(unit_params());
    p
}

pub fn decay(p: &Params) -> anyhow::Result<Outcome> {
    let spec = plateau(p)?;
    let solver = SolverConfig::default();
    let n = p.i64("n");
    let sigma_cut = p.positive("sigma_over_a")? * spec.a;
    let mode = solve_mode(&spec, n, &solver)?;
    let horizon = p.positive("horizon_over_tau")?.min(1.0) * mode.tau;
    let grid = decay_grid(&mode, &spec, sigma_cut, horizon, p.count("points_per_a", 2)?)?;
    let state = build_metastable(&mode, &spec, sigma_cut, &grid)?;
    let cfg = PropagatorConfig::new(p.positive("dt")?, spec.params)?.with_stencil(stencil(p)?);
    let scaling = off_plateau_scaling(&spec, &p.f64s("scaling_alphas"), n, sigma_cut / spec.a, &solver)?;
    let run = decay_experiment(&state, &spec, &cfg, horizon, p.count("samples", 2)?)?;

    let mut table = Table::new(
        "decay",
        &[
            "t",
            "plateau_prob",
            "region_discrepancy",
            "fitted_rate_so_far",
            "plateau_discrepancy",
            "doubled_region_discrepancy",
        ],
    );
    for (s, rate) in run.samples.iter().zip(&run.fitted_rate_so_far) {
        table.push(vec![
            s.time,
            s.plateau_prob,
            s.region_discrepancy,
            rate.unwrap_or(f64::NAN),
            s.plateau_discrepancy,
            s.doubled_region_discrepancy,
        ]);
    }
    let mut off = Table::new("off_plateau", &["alpha", "off_plateau_mass", "mass_times_alpha2"]);
    for (alpha, m) in scaling.alphas.iter().zip(&scaling.masses) {
        off.push(vec![*alpha, *m, m * alpha * alpha]);
    }

    let mut out = Outcome::default();
    out.result("tau", run.tau);
    out.result("tau_cl", run.tau_cl);
    out.result("horizon", horizon);
    out.result("expected_rate", run.expected_rate);
    out.result("fitted_rate", run.fitted_rate);
    out.result("fitted_tau", run.fitted_tau());
    out.result("survival_at_horizon", run.survival_at_horizon);
    out.result("grid_points", grid.len());
    out.result("grid_half_width", grid.x_max());
    out.result("time_step", run.report.time / run.report.steps.max(1) as f64);
    out.result("norm_drift", run.report.norm_drift);
    out.result(
        "normalisation_constant",
        json!({"re": state.a_n.re, "im": state.a_n.im}),
    );
    out.result("off_plateau_slope", scaling.slope);
    out.result("off_plateau_constant", scaling.constant);
    out.result("max_doubled_region_discrepancy", run.max_doubled_region_discrepancy());

    let mass = state.off_plateau_mass;
    out.check(Check::new("initial off-plateau mass", mass, "< 0.01", mass < 0.01));
    out.check(Check::new(
        "off-plateau mass scaling slope",
        scaling.slope,
        "-2 +- 0.3",
        (scaling.slope + 2.0).abs() <= 0.3,
    ));
    let e = run.rate_error();
    out.check(Check::new("fitted decay rate", e, "< 0.1 relative", e < 0.1));
    if horizon >= mode.tau * (1.0 - 1e-9) {
        let target = (-1.0f64).exp();
        let dev = (run.survival_at_horizon / target - 1.0).abs();
        out.check(Check::new(
            "plateau survival at tau vs 1/e",
            dev,
            "< 0.15 relative",
            dev < 0.15,
        ));
    }
    let region = run.max_region_discrepancy();
    out.check(Check::new(
        "growing-region discrepancy",
        region,
        format!("<= {DISCREPANCY_THRESHOLD}"),
        region <= DISCREPANCY_THRESHOLD,
    ));
    let plat = run.max_plateau_discrepancy();
    out.check(Check::new(
        "plateau discrepancy",
        plat,
        format!("<= {DISCREPANCY_THRESHOLD}"),
        plat <= DISCREPANCY_THRESHOLD,
    ));
    let ratio = run.tau / run.tau_cl;
    out.check(Check::new("tau / tau_cl", ratio, "> 5", ratio > 5.0));
    out.check(Check::new(
        "norm drift",
        run.report.norm_drift,
        "< 1e-9",
        run.report.norm_drift < 1e-9,
    ));
    out.tables.extend([table, off]);
    Ok(out)
}

pub fn superposition_params() -> Vec<ParamSpec> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut p = vec![
        float("alpha", 40.0, "Plateau width 2a/lambda0"),
        float("a", 1.0, "Plateau half-width"),
        ints("modes", &[1, 2], "Mode indices of the superposition"),
        floats("coefficients", &[h, h], "Real coefficients, one per mode"),
        int("points_per_a", 200, "Grid points per plateau half-width"),
        float("dt", 2e-3, "Largest time step"),
        int("samples", 40, "Sampling instants after t = 0"),
        int("stencil_order", 2, "Order of the second-derivative stencil (2, 4 or 6)"),
        float(
            "envelope_tolerance",
            1e-9,
            "Round-off slack allowed when comparing with the single-mode curves",
        ),
    ];
    p.extend(unit_params());
    p
}

pub fn superposition(p: &Params) -> anyhow::Result<Outcome> {
    let spec = plateau(p)?;
    let solver = SolverConfig::default();
    let modes = p.i64s("modes");
    let coefficients = p.f64s("coefficients");
    if modes.len() != coefficients.len() {
        return Err(config_error(format!(
            "{} modes but {} coefficients",
            modes.len(),
            coefficients.len()
        )));
    }
    let terms: Vec<(i64, Complex64)> = modes
        .iter()
        .zip(&coefficients)
        .map(|(n, c)| (*n, Complex64::new(*c, 0.0)))
        .collect();
    let mix = SuperpositionSpec::new(terms).map_err(|e| config_error(e.to_string()))?;
    let samples = p.count("samples", 2)?;
    let cfg = PropagatorConfig::new(p.positive("dt")?, spec.params)?.with_stencil(stencil(p)?);
    let ppa = p.count("points_per_a", 2)?;

    let mut specs = vec![mix.clone()];
    for n in &modes {
        specs.push(SuperpositionSpec::single(*n)?);
    }
    let mut min_tau = f64::INFINITY;
    for n in &modes {
        min_tau = min_tau.min(solve_mode(&spec, *n, &solver)?.tau);
    }
    // One grid for all runs so the curves are comparable.
    let grid = superposition_grid(&spec, &mix, min_tau, ppa, &solver)?;
    let runs: Vec<qstep::Result<SuperpositionRun>> = specs
        .par_iter()
        .map(|s| superposition_experiment(&spec, s, &cfg, &grid, min_tau, samples, &solver))
        .collect();
    let runs = runs.into_iter().collect::<qstep::Result<Vec<_>>>()?;
    let mixed = &runs[0];
    let singles = &runs[1..];

    let mut header = vec!["t", "plateau_prob", "discrepancy"];
    let names = ["single_first", "single_second", "single_third", "single_fourth"];
    if singles.len() > names.len() {
        return Err(config_error(format!("at most {} modes are supported", names.len())));
    }
    header.extend(&names[..singles.len()]);
    let mut table = Table::new("superposition", &header);
    for (i, t) in mixed.times.iter().enumerate() {
        let mut row = vec![*t, mixed.plateau_prob[i], mixed.discrepancy[i]];
        row.extend(singles.iter().map(|s| s.plateau_prob[i]));
        table.push(row);
    }

    let mut out = Outcome::default();
    out.result("min_tau", min_tau);
    out.result("fitted_tau", mixed.fitted_tau);
    out.result("normalization", mixed.normalization);
    out.result("grid_points", grid.len());
    out.result("norm_drift", mixed.report.norm_drift);
    out.result(
        "single_mode_fitted_tau",
        singles.iter().map(|s| s.fitted_tau).collect::<Vec<_>>(),
    );
    let d = mixed.max_discrepancy();
    out.check(Check::new(
        "plateau discrepancy up to min tau",
        d,
        format!("< {DISCREPANCY_THRESHOLD}"),
        d < DISCREPANCY_THRESHOLD,
    ));
    let tol = p.f64("envelope_tolerance");
    let mut worst = f64::NEG_INFINITY;
    for (i, pm) in mixed.plateau_prob.iter().enumerate() {
        let lo = singles.iter().map(|s| s.plateau_prob[i]).fold(f64::INFINITY, f64::min);
        let hi = singles
            .iter()
            .map(|s| s.plateau_prob[i])
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(lo - pm).max(pm - hi);
    }
    out.result("envelope_excess", worst);
    out.check(Check::new(
        "survival between the single-mode curves",
        worst,
        format!("excess <= {tol:e}"),
        worst <= tol,
    ));
    let ratio = mixed.fitted_tau / min_tau;
    out.check(Check::new("fitted tau / min tau", ratio, ">= 0.9", ratio >= 0.9));
    out.tables.push(table);
    Ok(out)
}
