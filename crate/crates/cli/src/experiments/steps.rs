//! Stationary reflection at rectangular and tanh steps.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;

use qstep::stationary::{rect_step_r, soft_step_r, transfer_matrix_r, DimensionlessStep, WaveNumbers};
use qstep::Potential;

use super::{geomspace, linspace, physical, unit_params};
use crate::output::{Check, Outcome, Table};
use crate::params::{float, floats, int, ParamSpec, Params};

pub fn step_sweep_params() -> Vec<ParamSpec> {
    let mut p = vec![
        float("energy", 1.0, "Incident energy E"),
        float("de_max", 100.0, "Largest step depth in the sweep"),
        int("points", 201, "Number of depths from 0 to de_max"),
        float("check_de", 18.4, "Depth at which R is reported"),
        int("slices", 2, "Transfer-matrix slices across [-1, 1]"),
        float("limit_depth", 1.0, "Depth used for the E -> 0 sequence"),
        floats(
            "limit_ratios",
            &[1e-2, 1e-4, 1e-6],
            "E/depth values of the E -> 0 sequence",
        ),
    ];
    p.extend(unit_params());
    p
}

pub fn step_sweep(p: &Params) -> anyhow::Result<Outcome> {
    let params = physical(p)?;
    let energy = p.positive("energy")?;
    let slices = p.count("slices", 1)?;
    let depths = linspace(0.0, p.f64("de_max"), p.count("points", 1)?);
    let rows: Vec<qstep::Result<Vec<f64>>> = depths
        .par_iter()
        .map(|&de| {
            let c = rect_step_r(energy, de, &params)?;
            let v = Potential::rect_step(de);
            let tm = transfer_matrix_r(&v, energy, -1.0, 1.0, slices, &params)?;
            Ok(vec![de, de / energy, c.r, c.t, tm.r, tm.t])
        })
        .collect();
    let mut table = Table::new("sweep", &["de", "de_over_e", "r", "t", "r_transfer", "t_transfer"]);
    for row in rows {
        table.push(row?);
    }

    let mut out = Outcome::default();
    let check_de = p.f64("check_de");
    let closed = rect_step_r(energy, check_de, &params)?;
    let tm = transfer_matrix_r(&Potential::rect_step(check_de), energy, -1.0, 1.0, slices, &params)?;
    out.result("r_check", closed.r);
    out.result("t_check", closed.t);
    out.result("r_check_transfer", tm.r);
    out.result("t_check_transfer", tm.t);
    out.check(Check::new(
        "closed form vs transfer matrix",
        (closed.r - tm.r).abs(),
        "< 1e-12",
        (closed.r - tm.r).abs() < 1e-12,
    ));

    let depth = p.positive("limit_depth")?;
    let mut limit = Vec::new();
    for ratio in p.f64s("limit_ratios") {
        let c = rect_step_r(ratio * depth, depth, &params)?;
        limit.push(json!({"ratio": ratio, "r": c.r}));
    }
    let rs: Vec<f64> = limit.iter().map(|v| v["r"].as_f64().unwrap_or(f64::NAN)).collect();
    let increasing = rs.windows(2).all(|w| w[1] > w[0]);
    let last = rs.last().copied().unwrap_or(f64::NAN);
    out.result("limit", limit);
    out.check(Check::new(
        "R increases as E -> 0",
        last,
        "each step increases R",
        increasing,
    ));
    out.check(Check::new("R at the smallest E", last, "> 0.996", last > 0.996));
    let zero = rect_step_r(energy, 0.0, &params)?.r;
    out.result("r_zero_depth", zero);
    out.check(Check::new("R without a step", zero, "== 0", zero == 0.0));
    out.tables.push(table);
    Ok(out)
}

pub fn soft_sweep_params() -> Vec<ParamSpec> {
    let mut p = vec![
        float("energy", 1.0, "Incident energy E"),
        float("de", 18.4, "Step depth"),
        float("l_min", 1e-3, "Smallest width"),
        float("l_max", 1.0, "Largest width"),
        int("points", 20, "Widths on a geometric grid"),
        float("small_width", 1e-9, "Width times k2 for the sharp-step comparison"),
        float("limit_ratio", 1e6, "depth/E for the steep-step limit"),
        float("limit_width", 0.1, "Width for the steep-step limit"),
        int("tm_slices", 4000, "Transfer-matrix slices across [-20L, 20L]"),
    ];
    p.extend(unit_params());
    p
}

pub fn soft_sweep(p: &Params) -> anyhow::Result<Outcome> {
    let params = physical(p)?;
    let energy = p.positive("energy")?;
    let de = p.f64("de");
    let slices = p.count("tm_slices", 1)?;
    let widths = geomspace(p.positive("l_min")?, p.positive("l_max")?, p.count("points", 2)?);
    let k = WaveNumbers::new(energy, de, &params)?;
    let rect = rect_step_r(energy, de, &params)?.r;
    let rows: Vec<qstep::Result<Vec<f64>>> = widths
        .par_iter()
        .map(|&l| {
            let soft = soft_step_r(energy, de, l, &params)?.r;
            let v = Potential::soft_step(de, l);
            let tm = transfer_matrix_r(&v, energy, -20.0 * l, 20.0 * l, slices, &params)?;
            Ok(vec![l, k.k2 * l, soft, rect, tm.r])
        })
        .collect();
    let mut table = Table::new("sweep", &["l", "k2_l", "r_soft", "r_rect", "r_transfer"]);
    for row in rows {
        table.push(row?);
    }
    let mut out = Outcome::default();

    let small = soft_step_r(energy, de, p.positive("small_width")? / k.k2, &params)?.r;
    out.result("r_small_width", small);
    out.result("r_rect", rect);
    out.check(Check::new(
        "sharp tanh step vs rectangular",
        (small - rect).abs(),
        "< 1e-6",
        (small - rect).abs() < 1e-6,
    ));
    let r_soft: Vec<f64> = table.rows.iter().map(|r| r[2]).collect();
    let decreasing = r_soft.windows(2).all(|w| w[1] < w[0]);
    out.check(Check::new(
        "R strictly decreasing in L",
        r_soft.last().copied().unwrap_or(f64::NAN),
        "every step decreases R",
        decreasing,
    ));
    let worst = r_soft.iter().map(|r| r - rect).fold(f64::NEG_INFINITY, f64::max);
    out.check(Check::new(
        "tanh R bounded by rectangular R",
        worst,
        "max(R_soft - R_rect) <= 0",
        worst <= 0.0,
    ));
    let tm_dev = table
        .rows
        .iter()
        .map(|r| ((r[4] - r[2]) / r[2]).abs())
        .fold(0.0, f64::max);
    out.result("max_transfer_relative_deviation", tm_dev);

    let ratio = p.positive("limit_ratio")?;
    let lw = p.positive("limit_width")?;
    let steep = soft_step_r(energy, ratio * energy, lw, &params)?.r;
    let asym = (-2.0 * PI * (2.0 * params.mass * energy).sqrt() * lw / params.hbar).exp();
    out.result("r_steep", steep);
    out.result("r_steep_limit", asym);
    out.check(Check::new(
        "steep step vs exp(-2 pi k1 L)",
        (steep / asym - 1.0).abs(),
        "< 0.01 relative",
        (steep / asym - 1.0).abs() < 0.01,
    ));
    out.tables.push(table);
    Ok(out)
}

pub fn uv_map_params() -> Vec<ParamSpec> {
    vec![
        float("u_min", 1e-4, "Smallest u"),
        float("u_max", 1.0, "Largest u"),
        float("v_min", 1e-3, "Smallest v"),
        float("v_max", 10.0, "Largest v"),
        int("nu", 200, "Points in u (log grid)"),
        int("nv", 200, "Points in v (log grid)"),
        float("taylor_u_max", 1e-2, "Largest u in the Taylor check"),
        float("taylor_v_min", 0.1, "Smallest v in the Taylor check"),
        float("taylor_v_max", 10.0, "Largest v in the Taylor check"),
    ]
}

pub fn uv_map(p: &Params) -> anyhow::Result<Outcome> {
    let us = geomspace(p.positive("u_min")?, p.positive("u_max")?, p.count("nu", 1)?);
    let vs = geomspace(p.positive("v_min")?, p.positive("v_max")?, p.count("nv", 1)?);
    let rows: Vec<qstep::Result<Vec<Vec<f64>>>> = us
        .par_iter()
        .map(|&u| {
            vs.iter()
                .map(|&v| {
                    let d = DimensionlessStep::new(u, v)?;
                    let r = d.reflection();
                    Ok(vec![u, v, r, r.sqrt() - d.taylor_sqrt_r()])
                })
                .collect()
        })
        .collect();
    let mut table = Table::new("uv", &["u", "v", "r", "sqrt_r_remainder"]);
    for block in rows {
        for row in block? {
            table.push(row);
        }
    }

    let mut out = Outcome::default();
    let region: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[0] < 1e-3 && r[1] > 1e3 * r[0]).collect();
    let min_r = region.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    out.result("region_points", region.len());
    out.result("region_min_r", min_r);
    out.check(Check::new(
        "R > 0.99 where u < 1e-3 and v > 1e3 u",
        min_r,
        "min R > 0.99",
        !region.is_empty() && min_r > 0.99,
    ));

    let (tu, tv0, tv1) = (p.f64("taylor_u_max"), p.f64("taylor_v_min"), p.f64("taylor_v_max"));
    let taylor: Vec<&Vec<f64>> = table
        .rows
        .iter()
        .filter(|r| r[0] <= tu && r[1] >= tv0 && r[1] <= tv1)
        .collect();
    let worst = taylor.iter().map(|r| r[3].abs() / (r[0] * r[0])).fold(0.0, f64::max);
    let failing = taylor.iter().filter(|r| r[3].abs() >= 10.0 * r[0] * r[0]).count();
    out.result("taylor_points", taylor.len());
    out.result("taylor_points_over_10u2", failing);
    out.result("taylor_max_remainder_over_u2", worst);
    out.check(Check::new(
        "|sqrt R - (1 - 2u/tanh v)| < 10 u^2",
        worst,
        "max remainder/u^2 < 10",
        worst < 10.0,
    ));
    // Leading remainder term 2u²coth²v; the next correction is about
    // half of u·coth v relative to it.
    let leading = taylor
        .iter()
        .map(|r| {
            let c = 1.0 / r[1].tanh();
            let lead = 2.0 * r[0] * r[0] * c * c;
            (r[3] / lead - 1.0).abs() / (r[0] * c)
        })
        .fold(0.0, f64::max);
    out.result("leading_term_max_relative_error_over_u_coth_v", leading);
    out.check(Check::new(
        "remainder matches 2u^2 coth^2 v",
        leading,
        "|rem/(2u^2 coth^2 v) - 1| <= u coth v",
        leading <= 1.0,
    ));
    out.tables.push(table);
    Ok(out)
}
