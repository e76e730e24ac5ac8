//! Decay eigenvalues of the plateau.

use rayon::prelude::*;
use serde_json::json;

use qstep::gamow::{
    asymptotic_z, enumerate_modes, infinite_well_level, lifetime, solve_mode, Census, Eigenfunction, Parity,
    PlateauSpec, SolverConfig,
};

use super::{linspace, physical, unit_params};
use crate::output::{Check, Outcome, Table};
use crate::params::{float, floats, int, ints, ParamSpec, Params};

/// Sample points in units of a, away from the nodes of the low modes.
const PROBE_X: [f64; 7] = [-0.83, -0.31, 0.17, 0.71, 1.5, -2.5, 3.0];

pub fn params() -> Vec<ParamSpec> {
    let mut p = vec![
        floats(
            "alphas",
            &[10.0, 20.0, 50.0, 100.0],
            "Plateau widths 2a/lambda0 for the census",
        ),
        float("a", 1.0, "Plateau half-width"),
        int("iteration_depth", 3, "Check the iterate bound for j = 1 .. this"),
        float("asymptotic_alpha", 100.0, "alpha for the small-n asymptotics"),
        ints(
            "asymptotic_modes",
            &[1, 2, 3],
            "Modes compared with the asymptotic formulas",
        ),
        int(
            "eigenfunction_modes",
            6,
            "Eigenfunction checks for n = 1 .. this at every alpha",
        ),
        float("plot_alpha", 8.0, "alpha of the exported eigenfunction"),
        int("plot_n", 4, "Index of the exported eigenfunction"),
        float("plot_extent", 2.5, "Export x in [-extent, extent] (units of a)"),
        int("plot_points", 2001, "Points in the eigenfunction export"),
    ];
    p.extend(unit_params());
    p
}

struct EigenChecks {
    matching: f64,
    residual: f64,
    parity: f64,
    decay_identity: f64,
}

fn eigen_checks(ef: &Eigenfunction, parity: Parity, tau: f64, k: f64, k_out: f64, a: f64) -> EigenChecks {
    let sign = match parity {
        Parity::Cos => 1.0,
        Parity::Sin => -1.0,
    };
    let mut out = EigenChecks {
        matching: ef.matching_error(),
        residual: 0.0,
        parity: 0.0,
        decay_identity: 0.0,
    };
    for u in PROBE_X {
        let x = u * a;
        let h = 0.03 / if x.abs() < a { k } else { k_out };
        out.residual = out.residual.max(ef.ode_residual(x, h));
        let psi = ef.eval(x);
        out.parity = out.parity.max((ef.eval(-x) - sign * psi).norm() / psi.norm());
        let t = 0.37 * tau;
        let lhs = ef.eval_t(x, t).norm_sqr();
        let rhs = ef.decay_factor(t) * psi.norm_sqr();
        out.decay_identity = out.decay_identity.max((lhs / rhs - 1.0).abs());
    }
    out
}

pub fn run(p: &Params) -> anyhow::Result<Outcome> {
    let phys = physical(p)?;
    let a = p.positive("a")?;
    let solver = SolverConfig::default();
    let depth = p.count("iteration_depth", 1)?;
    let alphas = p.f64s("alphas");
    let censuses: Vec<qstep::Result<(PlateauSpec, Census)>> = alphas
        .par_iter()
        .map(|&alpha| {
            let spec = PlateauSpec::from_alpha(alpha, a, phys)?;
            Ok((spec, enumerate_modes(&spec, &solver)?))
        })
        .collect();

    let mut modes = Table::new(
        "modes",
        &[
            "alpha",
            "n",
            "kappa_re",
            "kappa_im",
            "z_re",
            "z_im",
            "tau",
            "residual",
            "iterations",
            "in_census",
        ],
    );
    let mut iteration = Table::new("iteration_error", &["alpha", "n", "j", "error", "bound"]);
    let mut out = Outcome::default();
    let mut counts = Vec::new();
    let (mut counts_ok, mut signs_ok) = (true, true);
    let (mut worst_residual, mut worst_ratio) = (0.0f64, 0.0f64);
    let (mut matching, mut ode, mut parity, mut identity) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let n_eigen = p.count("eigenfunction_modes", 0)? as i64;
    for census in censuses {
        let (spec, census) = census?;
        let alpha = census.alpha;
        counts.push(json!({"alpha": alpha, "count": census.count(), "excluded": census.excluded.len()}));
        counts_ok &= census.count_in_bounds();
        let mut all: Vec<_> = census.modes.iter().map(|m| (m, true)).collect();
        all.extend(census.excluded.iter().map(|m| (m, false)));
        all.sort_by_key(|(m, _)| m.n);
        for (m, kept) in all {
            modes.push(vec![
                alpha,
                m.n as f64,
                m.kappa.re,
                m.kappa.im,
                m.z.re,
                m.z.im,
                m.tau,
                m.residual,
                m.iterations as f64,
                if kept { 1.0 } else { 0.0 },
            ]);
            if !kept {
                continue;
            }
            signs_ok &= m.kappa.re > 0.0 && m.kappa.im < 0.0;
            worst_residual = worst_residual.max(m.residual);
            for j in 1..=depth.min(m.iterates.len() - 1) {
                let err = (m.kappa - m.iterates[j]).norm();
                let bound = m.n as f64 * alpha.powi(-(j as i32 + 1));
                worst_ratio = worst_ratio.max(err / bound);
                iteration.push(vec![alpha, m.n as f64, j as f64, err, bound]);
            }
            if m.n <= n_eigen {
                let ef = Eigenfunction::new(m, &spec);
                let c = eigen_checks(&ef, m.parity, m.tau, m.k.norm(), m.k_tilde.norm(), a);
                matching = matching.max(c.matching);
                ode = ode.max(c.residual);
                parity = parity.max(c.parity);
                identity = identity.max(c.decay_identity);
            }
        }
    }
    out.result("counts", counts);
    out.check(Check::new(
        "alpha - 2 < N <= alpha + 2",
        alphas.len() as f64,
        "every alpha",
        counts_ok,
    ));
    out.check(Check::new(
        "Re kappa > 0 and Im kappa < 0",
        0.0,
        "every kept mode",
        signs_ok,
    ));
    out.check(Check::new(
        "fixed-point residual",
        worst_residual,
        "< 1e-14",
        worst_residual < 1e-14,
    ));
    out.check(Check::new(
        "iterate error bound n alpha^-(j+1)",
        worst_ratio,
        "max error/bound <= 1",
        worst_ratio <= 1.0,
    ));

    let alpha = p.positive("asymptotic_alpha")?;
    let spec = PlateauSpec::from_alpha(alpha, a, phys)?;
    let (mut z_err, mut well_err, mut tau_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut asym = Vec::new();
    for n in p.i64s("asymptotic_modes") {
        let m = solve_mode(&spec, n, &solver)?;
        let life = lifetime(&spec, &m)?;
        let dz = (m.z - asymptotic_z(&spec, n)).norm() / m.z.norm();
        let dw = (m.z.re / infinite_well_level(&spec, n) - 1.0).abs();
        let dt = (life.tau_z / life.tau_qu - 1.0).abs();
        z_err = z_err.max(dz);
        well_err = well_err.max(dw);
        tau_err = tau_err.max(dt);
        asym.push(json!({
            "n": n, "z_re": m.z.re, "z_im": m.z.im, "z_relative_error": dz,
            "well_relative_error": dw, "tau": m.tau, "tau_qu": life.tau_qu, "tau_cl": life.tau_cl,
        }));
    }
    out.result("asymptotics", asym);
    let z_tol = 10.0 / (alpha * alpha);
    out.check(Check::new(
        "Z against the asymptotic formula",
        z_err,
        format!("< 10/alpha^2 = {z_tol:e}"),
        z_err < z_tol,
    ));
    out.check(Check::new(
        "Re Z against the infinite well",
        well_err,
        "< 0.01 relative",
        well_err < 0.01,
    ));
    out.check(Check::new(
        "tau against tau_qu",
        tau_err,
        "< 0.02 relative",
        tau_err < 0.02,
    ));

    out.result("eigenfunction_matching", matching);
    out.result("eigenfunction_ode_residual", ode);
    out.result("eigenfunction_parity", parity);
    out.result("eigenfunction_decay_identity", identity);
    out.check(Check::new(
        "C1 matching at the edges",
        matching,
        "< 1e-10",
        matching < 1e-10,
    ));
    out.check(Check::new("ODE residual", ode, "< 1e-8 relative", ode < 1e-8));
    out.check(Check::new("parity", parity, "< 1e-10 relative", parity < 1e-10));
    out.check(Check::new(
        "decay identity",
        identity,
        "< 1e-12 relative",
        identity < 1e-12,
    ));

    let plot_spec = PlateauSpec::from_alpha(p.positive("plot_alpha")?, a, phys)?;
    let plot_solver = SolverConfig {
        allow_unverified: true,
        ..solver
    };
    let m = solve_mode(&plot_spec, p.i64("plot_n"), &plot_solver)?;
    let ef = Eigenfunction::new(&m, &plot_spec);
    let extent = p.positive("plot_extent")? * a;
    let mut eig = Table::new("eigenfunction", &["x", "re", "im", "density"]);
    for x in linspace(-extent, extent, p.count("plot_points", 2)?) {
        let v = ef.eval(x);
        eig.push(vec![x, v.re, v.im, v.norm_sqr()]);
    }
    out.result(
        "plot_mode",
        json!({"alpha": m.alpha, "n": m.n, "z_re": m.z.re, "z_im": m.z.im, "unverified": m.unverified}),
    );
    out.tables.extend([modes, iteration, eig]);
    Ok(out)
}
