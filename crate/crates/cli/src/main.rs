//! `qstep`: named experiments for step reflection, packet scattering and
//! plateau decay. Each run writes CSV tables, summary.json, manifest.toml
//! and plot.py into its output directory.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod experiments;
mod output;
mod params;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Arg, ArgAction, ArgMatches, Command};

use experiments::{find, Experiment, EXPERIMENTS};
use output::{write_failure, write_outcome, RunInfo};
use params::{config_error, parse_value, ConfigError, ConfigFile, Params};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn parameter_help(exp: &Experiment) -> String {
    let mut text = String::from("Parameters (set with --param key=value or [params] in --config):\n");
    for p in (exp.params)() {
        text.push_str(&format!("  {:<20} {} (default {})\n", p.name, p.help, p.default));
    }
    text.push_str("\nCSV outputs:\n");
    for (file, columns) in exp.columns {
        text.push_str(&format!("  {file}.csv: {columns}\n"));
    }
    text
}

fn command() -> Command {
    let common = [
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .value_parser(clap::value_parser!(PathBuf))
            .help("TOML file with optional `experiment`, `out` and a [params] table"),
        Arg::new("param")
            .long("param")
            .value_name("KEY=VALUE")
            .action(ArgAction::Append)
            .help("Override one parameter (repeatable)"),
        Arg::new("out")
            .long("out")
            .value_name("DIR")
            .value_parser(clap::value_parser!(PathBuf))
            .help("Output directory [default: runs/<experiment>]"),
    ];
    let mut cmd = Command::new("qstep")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Reflection at potential steps, wave-packet scattering and plateau decay experiments")
        .arg(
            Arg::new("list")
                .long("list")
                .action(ArgAction::SetTrue)
                .help("List the available experiments"),
        )
        .subcommand_required(false)
        .arg_required_else_help(true);
    for exp in EXPERIMENTS {
        cmd = cmd.subcommand(
            Command::new(exp.name)
                .about(exp.about)
                .after_long_help(parameter_help(exp))
                .args(common.clone()),
        );
    }
    cmd
}

fn overrides(m: &ArgMatches) -> anyhow::Result<Vec<(String, toml::Value)>> {
    m.get_many::<String>("param")
        .into_iter()
        .flatten()
        .map(|raw| {
            let (k, v) = raw
                .split_once('=')
                .ok_or_else(|| config_error(format!("expected KEY=VALUE, got `{raw}`")))?;
            Ok((k.trim().to_string(), parse_value(v.trim())))
        })
        .collect()
}

fn run(exp: &Experiment, m: &ArgMatches) -> anyhow::Result<ExitCode> {
    let file = match m.get_one::<PathBuf>("config") {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(name) = &file.experiment {
        if name != exp.name {
            return Err(config_error(format!(
                "config is for `{name}` but `{}` was requested",
                exp.name
            )));
        }
    }
    let params = Params::resolve(&(exp.params)(), &file.params, &overrides(m)?)?;
    let out = m
        .get_one::<PathBuf>("out")
        .cloned()
        .or(file.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(exp.name));
    let info = RunInfo {
        experiment: exp.name,
        params: params.table(),
        plot_script: exp.plot,
    };
    match (exp.run)(&params) {
        Ok(outcome) => {
            write_outcome(&out, &info, &outcome)?;
            for c in &outcome.checks {
                println!(
                    "{} {}: {:.6e} ({})",
                    if c.pass { "ok  " } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Err(err) => {
            if err.downcast_ref::<ConfigError>().is_some() {
                return Err(err);
            }
            let Some(numerical) = err.downcast_ref::<qstep::Error>() else {
                return Err(err);
            };
            write_failure(&out, &info, numerical.name(), &format!("{err:#}")).context("while recording the failure")?;
            eprintln!("error [{}]: {err:#}", numerical.name());
            Ok(ExitCode::from(EXIT_NUMERICAL))
        }
    }
}

fn main() -> ExitCode {
    let matches = match command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if matches.get_flag("list") {
        for exp in EXPERIMENTS {
            println!("{:<18} {}", exp.name, exp.about);
        }
        return ExitCode::SUCCESS;
    }
    let Some((name, sub)) = matches.subcommand() else {
        let _ = command().print_help();
        return ExitCode::from(EXIT_CONFIG);
    };
    let exp = find(name).expect("subcommands come from the registry");
    match run(exp, sub) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else if err.downcast_ref::<qstep::Error>().is_some() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
