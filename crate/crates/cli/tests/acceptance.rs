//! Acceptance run: executes the named experiments and prints one PASS/FAIL
//! line per criterion. Exits non-zero on failures only when
//! `ACCEPTANCE_STRICT=1` is set.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;

/// R at E = 1, ΔE = 18.4 from an independent 50-digit evaluation.
const RECT_ORACLE: f64 = 0.396_825_621_150_465_7;

struct Run {
    dir: PathBuf,
    code: Option<i32>,
    summary: Value,
}

impl Run {
    fn check(&self, name: &str) -> Option<&Value> {
        self.summary["checks"]
            .as_array()?
            .iter()
            .find(|c| c["name"].as_str() == Some(name))
    }

    fn passes(&self, name: &str) -> bool {
        self.check(name).and_then(|c| c["pass"].as_bool()).unwrap_or(false)
    }

    fn value(&self, name: &str) -> f64 {
        self.check(name).and_then(|c| c["value"].as_f64()).unwrap_or(f64::NAN)
    }

    fn result(&self, key: &str) -> f64 {
        self.summary["results"][key].as_f64().unwrap_or(f64::NAN)
    }

    fn ok(&self) -> bool {
        self.code == Some(0)
    }

    fn csvs(&self) -> BTreeMap<String, Vec<u8>> {
        let mut out = BTreeMap::new();
        for entry in fs::read_dir(&self.dir).into_iter().flatten().flatten() {
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "csv") {
                let name = path.file_name().unwrap().to_string_lossy().into_owned();
                out.insert(name, fs::read(&path).unwrap_or_default());
            }
        }
        out
    }
}

fn run(root: &Path, tag: &str, experiment: &str, params: &[&str]) -> Run {
    let dir = root.join(format!("{experiment}-{tag}"));
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qstep"));
    cmd.arg(experiment).arg("--out").arg(&dir);
    for p in params {
        cmd.arg("--param").arg(p);
    }
    let start = Instant::now();
    let out = cmd.output().expect("qstep runs");
    eprintln!("  [{experiment} {tag}: {:.1} s]", start.elapsed().as_secs_f64());
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    let summary = fs::read_to_string(dir.join("summary.json"))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or(Value::Null);
    Run {
        dir,
        code: out.status.code(),
        summary,
    }
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, n: usize, title: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!(
            "criterion {n:>2} {}: {title} [{detail}]",
            if pass { "PASS" } else { "FAIL" }
        );
    }

    fn note(&self, n: usize, text: String) {
        println!("criterion {n:>2} note: {text}");
    }
}

/// Independent form of the rectangular-step formula in terms of r = E/ΔE.
fn rect_r_from_ratio(r: f64) -> f64 {
    let s = (1.0 + 1.0 / r).sqrt();
    ((1.0 - s) / (1.0 + s)).powi(2)
}

fn all(run: &Run, names: &[&str]) -> bool {
    run.ok() && names.iter().all(|n| run.passes(n))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path();
    let mut rep = Report { failures: 0 };

    // 1
    let step = run(root, "a", "step-sweep", &[]);
    let r = step.result("r_check");
    let oracle_agrees = (rect_r_from_ratio(1.0 / 18.4) - RECT_ORACLE).abs() < 1e-15;
    rep.line(
        1,
        "rectangular step R(E=1, dE=18.4) against the oracle, cross-checked by the 2-slice transfer matrix",
        step.ok() && (r - RECT_ORACLE).abs() <= 1e-4 && oracle_agrees && step.passes("closed form vs transfer matrix"),
        format!(
            "R = {r:.10}, oracle {RECT_ORACLE:.10}, |transfer - closed| = {:.1e}",
            step.value("closed form vs transfer matrix")
        ),
    );

    // 2
    rep.line(
        2,
        "R -> 1 monotonically as E -> 0 and R = 0 without a step",
        all(
            &step,
            &["R increases as E -> 0", "R at the smallest E", "R without a step"],
        ),
        format!(
            "R at E/dE = 1e-6: {:.6}, R(dE=0) = {}",
            step.value("R at the smallest E"),
            step.value("R without a step")
        ),
    );

    // 3
    let soft = run(root, "a", "soft-step-sweep", &[]);
    rep.line(
        3,
        "tanh step: sharp limit, monotone in L, below the rectangular value, steep-step limit",
        all(
            &soft,
            &[
                "sharp tanh step vs rectangular",
                "R strictly decreasing in L",
                "tanh R bounded by rectangular R",
                "steep step vs exp(-2 pi k1 L)",
            ],
        ),
        format!(
            "sharp {:.1e}, max(R_soft - R_rect) = {:.2e}, steep limit {:.1e}",
            soft.value("sharp tanh step vs rectangular"),
            soft.value("tanh R bounded by rectangular R"),
            soft.value("steep step vs exp(-2 pi k1 L)")
        ),
    );

    // 4
    let uv = run(root, "a", "uv-map", &[]);
    rep.line(
        4,
        "R(u, v) > 0.99 for u < 1e-3, v > 1e3 u and |sqrt R - (1 - 2u/tanh v)| < 10 u^2",
        all(
            &uv,
            &[
                "R > 0.99 where u < 1e-3 and v > 1e3 u",
                "|sqrt R - (1 - 2u/tanh v)| < 10 u^2",
            ],
        ),
        format!(
            "min R in region {:.5}, max remainder/u^2 {:.1} ({} of {} points over 10 u^2)",
            uv.value("R > 0.99 where u < 1e-3 and v > 1e3 u"),
            uv.value("|sqrt R - (1 - 2u/tanh v)| < 10 u^2"),
            uv.summary["results"]["taylor_points_over_10u2"],
            uv.summary["results"]["taylor_points"],
        ),
    );
    rep.note(
        4,
        format!(
            "remainder follows 2u^2 coth^2 v to relative u coth v: {} (worst ratio {:.3})",
            if uv.passes("remainder matches 2u^2 coth^2 v") {
                "yes"
            } else {
                "no"
            },
            uv.value("remainder matches 2u^2 coth^2 v")
        ),
    );

    // 5
    let pk = run(root, "a", "packet-scatter", &[]);
    rep.line(
        5,
        "sigma = 0.01, k0 = 200 pi packet on the tanh step: momentum average vs propagation < 5e-3, both within 0.02 of the rectangular value",
        all(
            &pk,
            &[
                "momentum average vs propagation",
                "momentum average vs rectangular closed form",
                "propagation vs rectangular closed form",
            ],
        ),
        format!(
            "R_spectral {:.3e}, R_propagation {:.3e}, R_rect {:.5}",
            pk.result("r_spectral"),
            pk.result("r_propagation"),
            pk.result("r_rect")
        ),
    );
    let pk_rect = run(root, "rect", "packet-scatter", &["profile=\"rect\""]);
    rep.note(
        5,
        format!(
            "same packet on a sharp step: R_spectral {:.5}, R_propagation {:.5}, checks {}",
            pk_rect.result("r_spectral"),
            pk_rect.result("r_propagation"),
            if all(
                &pk_rect,
                &[
                    "momentum average vs propagation",
                    "momentum average vs rectangular closed form",
                    "propagation vs rectangular closed form",
                ]
            ) {
                "pass"
            } else {
                "fail"
            }
        ),
    );

    // 6
    let prop = run(root, "a", "propagator-check", &[]);
    rep.line(
        6,
        "norm drift < 1e-9 over the snapshot run, free spreading within 0.5%, dt order 2.0 +- 0.3",
        all(
            &prop,
            &[
                "norm drift over the snapshot run",
                "free spreading law",
                "time-step convergence order",
            ],
        ) && pk.passes("norm drift"),
        format!(
            "drift {:.1e} (scatter run {:.1e}), spreading {:.1e}, order {:.3}",
            prop.value("norm drift over the snapshot run"),
            pk.value("norm drift"),
            prop.value("free spreading law"),
            prop.value("time-step convergence order")
        ),
    );

    // 7
    let mesh = run(root, "a", "mesh-pathology", &[]);
    let turns: Vec<String> = mesh.summary["results"]["runs"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|r| format!("N={} t={}", r["n_points"], r["turnaround"]))
                .collect()
        })
        .unwrap_or_default();
    rep.line(
        7,
        "spurious turnaround time strictly increasing in N",
        all(&mesh, &["turnaround time increases with N"]),
        turns.join(", "),
    );

    // 8-10
    let census = run(root, "a", "gamow-census", &[]);
    rep.line(
        8,
        "census bounds, signs of kappa, residuals < 1e-14, iterate bounds for j = 1..3",
        all(
            &census,
            &[
                "alpha - 2 < N <= alpha + 2",
                "Re kappa > 0 and Im kappa < 0",
                "fixed-point residual",
                "iterate error bound n alpha^-(j+1)",
            ],
        ),
        format!(
            "counts {}, residual {:.1e}, worst error/bound {:.3}",
            census.summary["results"]["counts"],
            census.value("fixed-point residual"),
            census.value("iterate error bound n alpha^-(j+1)")
        ),
    );
    rep.line(
        9,
        "alpha = 100, n = 1..3: Z asymptotics, infinite-well energies, tau vs tau_qu",
        all(
            &census,
            &[
                "Z against the asymptotic formula",
                "Re Z against the infinite well",
                "tau against tau_qu",
            ],
        ),
        format!(
            "Z {:.1e}, well {:.1e}, tau {:.1e}",
            census.value("Z against the asymptotic formula"),
            census.value("Re Z against the infinite well"),
            census.value("tau against tau_qu")
        ),
    );
    rep.line(
        10,
        "eigenfunctions: C1 matching, ODE residual, parity, decay identity",
        all(
            &census,
            &["C1 matching at the edges", "ODE residual", "parity", "decay identity"],
        ),
        format!(
            "matching {:.1e}, residual {:.1e}, parity {:.1e}, identity {:.1e}",
            census.value("C1 matching at the edges"),
            census.value("ODE residual"),
            census.value("parity"),
            census.value("decay identity")
        ),
    );

    // 11
    let decay = run(root, "a", "plateau-decay", &[]);
    rep.line(
        11,
        "alpha = 40, n = 1: off-plateau mass and its alpha^-2 scaling, decay rate, survival at tau, growing-region discrepancy",
        all(
            &decay,
            &[
                "initial off-plateau mass",
                "off-plateau mass scaling slope",
                "fitted decay rate",
                "plateau survival at tau vs 1/e",
                "growing-region discrepancy",
            ],
        ),
        format!(
            "mass {:.2e}, slope {:.3}, rate error {:.3}, P(tau) {:.4}, region discrepancy {:.2e}",
            decay.value("initial off-plateau mass"),
            decay.value("off-plateau mass scaling slope"),
            decay.value("fitted decay rate"),
            decay.result("survival_at_horizon"),
            decay.value("growing-region discrepancy")
        ),
    );

    // 12
    let sup = run(root, "a", "superposition", &[]);
    rep.line(
        12,
        "c1 = c2 = 1/sqrt 2: plateau discrepancy < 0.05 up to min tau, survival between the single-mode curves",
        all(
            &sup,
            &[
                "plateau discrepancy up to min tau",
                "survival between the single-mode curves",
            ],
        ),
        format!(
            "discrepancy {:.2e}, envelope excess {:.2e}",
            sup.value("plateau discrepancy up to min tau"),
            sup.value("survival between the single-mode curves")
        ),
    );

    // 13: the long runs are repeated at reduced size.
    let light_decay = [
        "alpha=12.0",
        "points_per_a=100",
        "horizon_over_tau=0.3",
        "samples=6",
        "scaling_alphas=[10.0, 20.0]",
    ];
    let light_sup = ["alpha=20.0", "points_per_a=100", "samples=4", "dt=1e-3"];
    let mut pairs = vec![
        (step, run(root, "b", "step-sweep", &[])),
        (soft, run(root, "b", "soft-step-sweep", &[])),
        (uv, run(root, "b", "uv-map", &[])),
        (pk, run(root, "b", "packet-scatter", &[])),
        (prop, run(root, "b", "propagator-check", &[])),
        (mesh, run(root, "b", "mesh-pathology", &[])),
        (census, run(root, "b", "gamow-census", &[])),
    ];
    pairs.push((
        run(root, "c", "plateau-decay", &light_decay),
        run(root, "d", "plateau-decay", &light_decay),
    ));
    pairs.push((
        run(root, "c", "superposition", &light_sup),
        run(root, "d", "superposition", &light_sup),
    ));
    let mut mismatched = Vec::new();
    let mut files = 0;
    for (a, b) in &pairs {
        let (ca, cb) = (a.csvs(), b.csvs());
        files += ca.len();
        if ca.is_empty() || ca != cb {
            mismatched.push(a.dir.display().to_string());
        }
    }
    rep.line(
        13,
        "re-running a config gives byte-identical CSVs",
        mismatched.is_empty(),
        format!(
            "{} experiments, {files} CSV files compared, mismatches: {mismatched:?}",
            pairs.len()
        ),
    );

    println!("{} of 13 criteria failed", rep.failures);
    if rep.failures > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
