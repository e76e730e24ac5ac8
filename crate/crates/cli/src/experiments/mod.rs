//! Experiment registry.

mod census;
mod decay;
mod packets;
mod steps;

use crate::output::Outcome;
use crate::params::{float, ParamSpec, Params};
use crate::plots;

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    /// (file stem, column list) for `--help`.
    pub columns: &'static [(&'static str, &'static str)],
    pub params: fn() -> Vec<ParamSpec>,
    pub run: fn(&Params) -> anyhow::Result<Outcome>,
    pub plot: &'static str,
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "step-sweep",
        about: "Rectangular step: R and T against the step depth, low-energy limit",
        columns: &[("sweep", "de, de_over_e, r, t, r_transfer, t_transfer")],
        params: steps::step_sweep_params,
        run: steps::step_sweep,
        plot: plots::STEP_SWEEP,
    },
    Experiment {
        name: "soft-step-sweep",
        about: "Tanh step: R against the width L, rectangular and steep-step limits",
        columns: &[("sweep", "l, k2_l, r_soft, r_rect, r_transfer")],
        params: steps::soft_sweep_params,
        run: steps::soft_sweep,
        plot: plots::SOFT_SWEEP,
    },
    Experiment {
        name: "uv-map",
        about: "R(u, v) on a log grid and the region where it exceeds 0.99",
        columns: &[("uv", "u, v, r, sqrt_r_remainder")],
        params: steps::uv_map_params,
        run: steps::uv_map,
        plot: plots::UV_MAP,
    },
    Experiment {
        name: "packet-scatter",
        about: "Gaussian packet through a step in a hard box: snapshots, R and T from propagation and momentum average",
        columns: &[
            ("snapshots", "frame, t, x, re, im, density, potential"),
            ("momentum", "k, density, r_k"),
        ],
        params: packets::scatter_params,
        run: packets::scatter,
        plot: plots::PACKET_SCATTER,
    },
    Experiment {
        name: "propagator-check",
        about: "Norm drift, free-packet spreading and time-step convergence of the propagator",
        columns: &[("convergence", "dt, error")],
        params: packets::check_params,
        run: packets::check,
        plot: plots::PROPAGATOR_CHECK,
    },
    Experiment {
        name: "mesh-pathology",
        about: "Packet rolling down an inverted parabola on coarse meshes: spurious turnaround of <x>",
        columns: &[("mean_x", "n_points, t, mean_x")],
        params: packets::mesh_params,
        run: packets::mesh,
        plot: plots::MESH_PATHOLOGY,
    },
    Experiment {
        name: "gamow-census",
        about: "Decay eigenvalues on the plateau: census, iteration bounds, asymptotics and one eigenfunction",
        columns: &[
            ("modes", "alpha, n, kappa_re, kappa_im, z_re, z_im, tau, residual, iterations, in_census"),
            ("iteration_error", "alpha, n, j, error, bound"),
            ("eigenfunction", "x, re, im, density"),
        ],
        params: census::params,
        run: census::run,
        plot: plots::GAMOW_CENSUS,
    },
    Experiment {
        name: "plateau-decay",
        about: "Cut-off Gamow state leaking off the plateau: survival, decay rate and discrepancies",
        columns: &[
            (
                "decay",
                "t, plateau_prob, region_discrepancy, fitted_rate_so_far, plateau_discrepancy, doubled_region_discrepancy",
            ),
            ("off_plateau", "alpha, off_plateau_mass, mass_times_alpha2"),
        ],
        params: decay::decay_params,
        run: decay::decay,
        plot: plots::PLATEAU_DECAY,
    },
    Experiment {
        name: "superposition",
        about: "Superposition of low modes truncated to the plateau, against single-mode runs",
        columns: &[("superposition", "t, plateau_prob, discrepancy, single_first, single_second")],
        params: decay::superposition_params,
        run: decay::superposition,
        plot: plots::SUPERPOSITION,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

/// ħ and m, shared by every experiment.
fn unit_params() -> Vec<ParamSpec> {
    vec![
        float("hbar", 1.0, "Reduced Planck constant"),
        float("mass", 1.0, "Particle mass"),
    ]
}

fn physical(p: &Params) -> anyhow::Result<qstep::PhysicalParams> {
    Ok(qstep::PhysicalParams::new(p.f64("hbar"), p.f64("mass"))?)
}

/// `n` points from `lo` to `hi`, evenly spaced in log.
fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        for (i, e) in EXPERIMENTS.iter().enumerate() {
            assert!(EXPERIMENTS[..i].iter().all(|o| o.name != e.name));
            let names: Vec<_> = (e.params)().iter().map(|p| p.name).collect();
            for (j, n) in names.iter().enumerate() {
                assert!(!names[..j].contains(n), "{} repeats {n}", e.name);
            }
        }
    }

    #[test]
    fn spaced_points_hit_the_ends() {
        let g = geomspace(1e-4, 1.0, 5);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[4] - 1.0).abs() < 1e-15);
        assert!((g[1] - 1e-3).abs() < 1e-15);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
