use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qstep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qstep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn list_names_every_experiment() {
    let out = qstep(&["--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "step-sweep",
        "soft-step-sweep",
        "uv-map",
        "packet-scatter",
        "propagator-check",
        "mesh-pathology",
        "gamow-census",
        "plateau-decay",
        "superposition",
    ] {
        assert!(text.contains(name), "{name} missing from --list");
    }
}

#[test]
fn help_documents_columns() {
    let out = qstep(&["uv-map", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("uv.csv: u, v, r, sqrt_r_remainder"));
    assert!(text.contains("taylor_u_max"));
}

#[test]
fn unknown_parameters_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qstep(&[
        "step-sweep",
        "--param",
        "energi=2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("energi"));
}

#[test]
fn mistyped_parameters_and_bad_files_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = qstep(&[
        "step-sweep",
        "--param",
        "points=1.5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "experiment = \"step-sweep\"\nextra = 1\n").unwrap();
    let out = qstep(&["step-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(&cfg, "experiment = \"uv-map\"\n").unwrap();
    let out = qstep(&["step-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(qstep(&["no-such-experiment"]).status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_with_3_and_name_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qstep(&[
        "gamow-census",
        "--param",
        "alphas=[5.0]",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let s = summary(dir.path());
    assert_eq!(s["status"], "error");
    assert_eq!(s["error"], "UnverifiedRegime");
    assert!(dir.path().join("manifest.toml").exists());
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out_dir = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            "experiment = \"step-sweep\"\nout = {:?}\n[params]\npoints = 11\nde_max = 10\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = qstep(&["step-sweep", "--config", cfg.to_str().unwrap(), "--param", "points=21"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    assert!(csv.starts_with("de,de_over_e,r,t,r_transfer,t_transfer\n"));

    let manifest: toml::Table = fs::read_to_string(out_dir.join("manifest.toml"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(manifest["experiment"].as_str(), Some("step-sweep"));
    assert_eq!(manifest["params"]["points"].as_integer(), Some(21));
    assert_eq!(manifest["params"]["de_max"].as_float(), Some(10.0));
    assert!(out_dir.join("plot.py").exists());
    assert_eq!(summary(&out_dir)["all_checks_pass"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = (0..2)
        .map(|i| {
            let d = dir.path().join(format!("run{i}"));
            let out = qstep(&["soft-step-sweep", "--out", d.to_str().unwrap()]);
            assert!(out.status.success());
            fs::read(d.join("sweep.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}
