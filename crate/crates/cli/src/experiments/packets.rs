//! Wave packets: scattering off a step, propagator checks and the
//! coarse-mesh demonstration.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;

use qstep::spectral::{
    density_reflection, epsilon_delta_bound, momentum_density, reflection_profile, LEFT_MASS_TOLERANCE,
};
use qstep::stationary::{paradoxical_region, rect_step_r, RegionThresholds};
use qstep::tdse::{
    mesh_pathology_demo, propagate, snapshot_rows, MeshPathologyConfig, PropagatorConfig, ScatteringRun, StopRule,
};
use qstep::{build_gaussian, GaussianPacketSpec, Grid, Potential, WaveFunction};

use super::{physical, unit_params};
use crate::output::{Check, Outcome, Table};
use crate::params::{config_error, float, floats, int, ints, text, ParamSpec, Params};

const FRAMES: [f64; 10] = [1.0, 4.0, 8.0, 11.0, 12.0, 13.0, 16.0, 18.0, 22.0, 27.0];

fn packet_params() -> Vec<ParamSpec> {
    let mut p = vec![
        float("mu", 0.1, "Initial packet centre"),
        float("sigma", 0.01, "Packet width"),
        float("k0", 200.0 * PI, "Mean wavenumber"),
        float("width", 0.01, "Step width L (tanh profile)"),
        float("de_ratio", 18.4, "Step depth in units of E = (hbar k0)^2/2m"),
        text("profile", "tanh", "Step shape: tanh or rect"),
        float("center", 0.3, "Step position"),
        float("box_lo", 0.0, "Left wall"),
        float("box_hi", 1.0, "Right wall"),
        int("n_points", 16001, "Grid points on [box_lo, box_hi]"),
        float("dt", 2e-7, "Time step"),
        floats("frames", &FRAMES, "Snapshot times in units of the frame interval"),
        float(
            "arrival_frame",
            12.0,
            "Frame at which the packet centre reaches the step",
        ),
    ];
    p.extend(unit_params());
    p
}

struct PacketSetup {
    params: qstep::PhysicalParams,
    spec: GaussianPacketSpec,
    step: Potential,
    boxed: Potential,
    grid: Grid,
    config: PropagatorConfig,
    frame_dt: f64,
    depth: f64,
    energy: f64,
}

fn packet_setup(p: &Params) -> anyhow::Result<PacketSetup> {
    let params = physical(p)?;
    let spec = GaussianPacketSpec::new(p.f64("mu"), p.positive("sigma")?, p.f64("k0"))?;
    let energy = params.energy(spec.k0.abs());
    let depth = p.f64("de_ratio") * energy;
    let center = p.f64("center");
    let step = match p.choice("profile", &["tanh", "rect"])?.as_str() {
        "tanh" => Potential::SoftStep {
            depth,
            width: p.positive("width")?,
            center,
        },
        _ => Potential::RectStep { depth, center },
    };
    let (lo, hi) = (p.f64("box_lo"), p.f64("box_hi"));
    let grid = Grid::new(lo, hi, p.count("n_points", 3)?)?;
    let speed = params.hbar * spec.k0.abs() / params.mass;
    let frame_dt = (center - spec.mu).abs() / (speed * p.positive("arrival_frame")?);
    Ok(PacketSetup {
        params,
        spec,
        boxed: step.clone().hard_box(lo, hi),
        step,
        grid,
        config: PropagatorConfig::new(p.positive("dt")?, params)?,
        frame_dt,
        depth,
        energy,
    })
}

pub fn scatter_params() -> Vec<ParamSpec> {
    let mut p = packet_params();
    p.extend([
        float(
            "gap",
            0.03,
            "Half-width of the zone around the step that must empty before R and T are read",
        ),
        float("max_time", 2e-3, "Give up waiting for separation after this time"),
        int("stride", 4, "Write every stride-th grid point in the snapshots"),
        float("eps", 0.1, "Epsilon of the momentum-space lower bound"),
    ]);
    p
}

pub fn scatter(p: &Params) -> anyhow::Result<Outcome> {
    let s = packet_setup(p)?;
    let stride = p.count("stride", 1)?;
    let psi0 = build_gaussian(&s.spec, &s.grid)?;
    let density = momentum_density(&psi0);
    let spectral = density_reflection(&density, &s.step, &s.params, LEFT_MASS_TOLERANCE)?;
    let bound = epsilon_delta_bound(&density, &s.step, p.f64("eps"), &s.params)?;

    let frames = p.f64s("frames");
    let run = ScatteringRun {
        initial: s.spec,
        potential: s.boxed.clone(),
        grid: s.grid,
        config: s.config,
        stop_rule: StopRule::PacketsSeparated {
            gap: p.positive("gap")?,
            max_time: p.positive("max_time")?,
        },
        snapshot_times: frames.iter().map(|f| f * s.frame_dt).collect(),
    }
    .run()?;
    let rect = rect_step_r(s.energy, s.depth, &s.params)?;
    let width = s.step.step_width().unwrap_or(0.0);
    let margins = paradoxical_region(
        s.spec.k0.abs(),
        width,
        s.depth,
        s.spec.sigma,
        &s.params,
        &RegionThresholds::default(),
    );

    let mut snaps = Table::new("snapshots", &["frame", "t", "x", "re", "im", "density", "potential"]);
    let scale = if s.depth > 0.0 { 1.0 / s.depth } else { 1.0 };
    for (snap, frame) in run.snapshots.iter().zip(&frames) {
        for row in snapshot_rows(&snap.psi, &s.boxed, scale).iter().step_by(stride) {
            snaps.push(vec![*frame, snap.time, row[0], row[1], row[2], row[3], row[4]]);
        }
    }
    let mut momentum = Table::new("momentum", &["k", "density", "r_k"]);
    for (k, d, r) in reflection_profile(&density, &s.step, &s.params)? {
        momentum.push(vec![k, d, r]);
    }

    let mut out = Outcome::default();
    let r_prop = run.coefficients.r;
    let r_spec = spectral.r;
    out.result("r_propagation", r_prop);
    out.result("t_propagation", run.coefficients.t);
    out.result("r_spectral", r_spec);
    out.result("t_spectral", spectral.t);
    out.result("r_rect", rect.r);
    out.result("stop_time", run.stop_time);
    out.result("frame_dt", s.frame_dt);
    out.result("norm_drift", run.report.norm_drift);
    out.result("steps", run.report.steps);
    out.result("wall_contact", run.report.wall_contact);
    out.result("left_moving_mass", density.left_mass());
    out.result(
        "region_margins",
        json!({
            "inverse_k1_l": margins.inverse_k1_l,
            "energy_ratio": margins.energy_ratio,
            "sigma_k1": margins.sigma_k1,
            "in_region": margins.in_region,
        }),
    );
    out.result(
        "eps_delta_bound",
        json!({"eps": bound.eps, "delta": bound.delta, "bound": bound.bound, "vacuous": bound.vacuous}),
    );
    let d = (r_spec - r_prop).abs();
    out.check(Check::new("momentum average vs propagation", d, "< 5e-3", d < 5e-3));
    for (name, r) in [("momentum average", r_spec), ("propagation", r_prop)] {
        let d = (r - rect.r).abs();
        out.check(Check::new(
            format!("{name} vs rectangular closed form"),
            d,
            "< 0.02",
            d < 0.02,
        ));
    }
    out.check(Check::new(
        "norm drift",
        run.report.norm_drift,
        "< 1e-9",
        run.report.norm_drift < 1e-9,
    ));
    out.tables.extend([snaps, momentum]);
    Ok(out)
}

pub fn check_params() -> Vec<ParamSpec> {
    let mut p = packet_params();
    p.extend([
        float("free_sigma", 0.2, "Free packet width"),
        float("free_k0", 10.0, "Free packet wavenumber"),
        float("free_time", 0.3, "Free propagation time"),
        int("free_points", 24001, "Grid points on [-6, 6]"),
        float("free_dt", 2e-4, "Time step of the free run"),
        floats("order_dts", &[2e-5, 1e-5], "Step sizes for the convergence order"),
        float("order_reference_dt", 1.25e-6, "Step of the reference run"),
        float("order_time", 4e-3, "Duration of the convergence runs"),
    ]);
    p
}

pub fn check(p: &Params) -> anyhow::Result<Outcome> {
    let s = packet_setup(p)?;
    let mut out = Outcome::default();

    // Norm over the whole snapshot run, walls included.
    let last = p.f64s("frames").into_iter().fold(0.0, f64::max) * s.frame_dt;
    let psi0 = build_gaussian(&s.spec, &s.grid)?;
    let (_, report) = propagate(&psi0, &s.boxed, &s.config, last)?;
    out.result("norm_run_time", last);
    out.result("norm_drift", report.norm_drift);
    out.result("max_step_drift", report.max_step_drift);
    out.check(Check::new(
        "norm drift over the snapshot run",
        report.norm_drift,
        "< 1e-9",
        report.norm_drift < 1e-9,
    ));

    // Free spreading: <x> = mu + k0 t, var = sigma²(1 + (ħt/2mσ²)²).
    let (sigma, k0, t) = (p.positive("free_sigma")?, p.f64("free_k0"), p.positive("free_time")?);
    let mu = -2.0;
    let grid = Grid::new(-6.0, 6.0, p.count("free_points", 3)?)?;
    let free = build_gaussian(&GaussianPacketSpec::new(mu, sigma, k0)?, &grid)?;
    let cfg = PropagatorConfig::new(p.positive("free_dt")?, s.params)?;
    let (psi_t, rep) = propagate(&free, &Potential::Free, &cfg, t)?;
    let hb = s.params.hbar / s.params.mass;
    let width2 = sigma * sigma * (1.0 + (hb * t / (2.0 * sigma * sigma)).powi(2));
    let spread_err = (psi_t.position_variance() / width2 - 1.0).abs();
    let mean_err = (psi_t.mean_position() - (mu + hb * k0 * t)).abs();
    out.result("free_variance_relative_error", spread_err);
    out.result("free_mean_error", mean_err);
    out.result("free_wall_contact", rep.wall_contact);
    out.check(Check::new(
        "free spreading law",
        spread_err,
        "< 0.005 relative",
        spread_err < 5e-3,
    ));

    // Time-step order against a fine reference.
    let dts = p.f64s("order_dts");
    if dts.len() < 2 {
        return Err(config_error("`order_dts` needs at least two step sizes"));
    }
    let grid = Grid::new(0.0, 1.0, 1001)?;
    let psi = build_gaussian(&GaussianPacketSpec::new(0.3, 0.04, 60.0)?, &grid)?;
    let v = Potential::soft_step(4e3, 0.03).hard_box(0.0, 1.0);
    let t_order = p.positive("order_time")?;
    let run = |dt: f64| -> anyhow::Result<WaveFunction> {
        Ok(propagate(&psi, &v, &PropagatorConfig::new(dt, s.params)?, t_order)?.0)
    };
    let reference = run(p.positive("order_reference_dt")?)?;
    let errors: Vec<anyhow::Result<f64>> = dts
        .par_iter()
        .map(|&dt| {
            let d = run(dt)?;
            Ok(d.amplitudes()
                .iter()
                .zip(reference.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt())
        })
        .collect();
    let mut table = Table::new("convergence", &["dt", "error"]);
    let mut errs = Vec::new();
    for (dt, e) in dts.iter().zip(errors) {
        let e = e?;
        table.push(vec![*dt, e]);
        errs.push(e);
    }
    let orders: Vec<f64> = errs
        .windows(2)
        .zip(dts.windows(2))
        .map(|(e, d)| (e[0] / e[1]).ln() / (d[0] / d[1]).ln())
        .collect();
    let order = orders[0];
    out.result("observed_orders", orders.clone());
    out.check(Check::new(
        "time-step convergence order",
        order,
        "2.0 +- 0.3",
        (order - 2.0).abs() < 0.3,
    ));
    out.tables.push(table);
    Ok(out)
}

pub fn mesh_params() -> Vec<ParamSpec> {
    let d = MeshPathologyConfig::default();
    let mut p = vec![
        ints("n_values", &[500, 1000, 2000], "Grid sizes to compare"),
        float("mu", d.packet.mu, "Initial packet centre"),
        float("sigma", d.packet.sigma, "Packet width"),
        float("k0", d.packet.k0, "Mean wavenumber"),
        float(
            "curvature_factor",
            d.curvature_factor,
            "V = -factor k0^2 (x - center)^2",
        ),
        float("center", d.center, "Apex of the parabola"),
        float("box_lo", d.box_lo, "Left wall"),
        float("box_hi", d.box_hi, "Right wall"),
        float("dt", d.dt, "Time step"),
        float("t_max", d.t_max, "Run length"),
        int("sample_every", d.sample_every as i64, "Steps between samples of <x>"),
    ];
    p.extend(unit_params());
    p
}

pub fn mesh(p: &Params) -> anyhow::Result<Outcome> {
    let cfg = MeshPathologyConfig {
        packet: GaussianPacketSpec::new(p.f64("mu"), p.positive("sigma")?, p.f64("k0"))?,
        curvature_factor: p.f64("curvature_factor"),
        center: p.f64("center"),
        box_lo: p.f64("box_lo"),
        box_hi: p.f64("box_hi"),
        dt: p.positive("dt")?,
        t_max: p.positive("t_max")?,
        sample_every: p.count("sample_every", 1)?,
        params: physical(p)?,
    };
    let mut ns = Vec::new();
    for n in p.i64s("n_values") {
        if n < 3 {
            return Err(config_error(format!("grid sizes must be at least 3, got {n}")));
        }
        ns.push(n as usize);
    }
    let runs = mesh_pathology_demo(&ns, &cfg)?;
    let mut table = Table::new("mean_x", &["n_points", "t", "mean_x"]);
    let mut turn = Vec::new();
    for r in &runs {
        for (t, x) in r.times.iter().zip(&r.mean_x) {
            table.push(vec![r.n_points as f64, *t, *x]);
        }
        turn.push(json!({
            "n_points": r.n_points,
            "turnaround": r.turnaround,
            "wall_contact": r.wall_contact,
        }));
    }
    // No turnaround inside the run counts as later than any detected one.
    let times: Vec<f64> = runs.iter().map(|r| r.turnaround.unwrap_or(f64::INFINITY)).collect();
    let increasing = times.windows(2).all(|w| w[1] > w[0]);
    let mut out = Outcome::default();
    out.result("runs", turn);
    out.check(Check::new(
        "turnaround time increases with N",
        times.first().copied().unwrap_or(f64::NAN),
        "strictly increasing",
        increasing,
    ));
    out.tables.push(table);
    Ok(out)
}
