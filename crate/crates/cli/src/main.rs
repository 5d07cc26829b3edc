mod commands;
mod config;

use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::commands::CliError;
use crate::config::{env_name, RawConfig, RunConfig, KEYS};

fn leaf(name: &str) -> &str {
    name.split_once('.').map_or(name, |(_, l)| l)
}

fn key_arg(name: &'static str, default: &str, help: &str) -> Arg {
    let dashed = name.replace('_', "-");
    let mut arg = Arg::new(name)
        .long(dashed.clone())
        .value_name("VALUE")
        .help(format!("{help} [default: {default:?}; env {}]", env_name(name)));
    if dashed != name {
        arg = arg.alias(name);
    }
    let l = leaf(name);
    if KEYS.iter().filter(|k| leaf(k.name) == l).count() == 1 {
        let short = l.replace('_', "-");
        arg = arg.visible_alias(short.clone());
        if short != l {
            arg = arg.alias(l);
        }
    }
    match name {
        "synth.kind" => arg.visible_alias("scenario"),
        "output.dir" => arg.visible_alias("out"),
        _ => arg,
    }
}

fn subcommand(name: &'static str, about: &'static str) -> Command {
    let mut cmd = Command::new(name).about(about).arg(
        Arg::new("config")
            .long("config")
            .value_name("PATH")
            .help("flat section.key = value file"),
    );
    for k in KEYS {
        cmd = cmd.arg(key_arg(k.name, k.default, k.help));
    }
    cmd
}

fn cli() -> Command {
    Command::new("shapshift")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Shapley-effect feature selection for regression under concept shift")
        .subcommand_required(true)
        .subcommand(subcommand("synth", "generate a synthetic shift scenario"))
        .subcommand(subcommand("select", "run the feature selector"))
        .subcommand(
            subcommand("shap", "dump TreeSHAP attributions")
                .arg(
                    Arg::new("verify")
                        .long("verify")
                        .action(ArgAction::SetTrue)
                        .help("check that every row sums to its prediction"),
                )
                .arg(
                    Arg::new("verify-exact")
                        .long("verify-exact")
                        .action(ArgAction::SetTrue)
                        .help("compare the first rows against full coalition enumeration"),
                ),
        )
        .subcommand(
            subcommand("bench", "compare selectors over evaluation seeds").arg(
                Arg::new("per-seed")
                    .long("per-seed")
                    .action(ArgAction::SetTrue)
                    .help("also write one row per algorithm and seed"),
            ),
        )
}

fn resolve(m: &ArgMatches) -> Result<RunConfig, CliError> {
    let mut raw = RawConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        raw.apply_file(&text)?;
    }
    raw.apply_env(std::env::vars())?;
    for k in KEYS {
        if m.value_source(k.name) == Some(ValueSource::CommandLine) {
            raw.set(k.name, m.get_one::<String>(k.name).unwrap())?;
        }
    }
    Ok(RunConfig::from_raw(&raw)?)
}

fn run(name: &str, m: &ArgMatches) -> Result<(), CliError> {
    let cfg = resolve(m)?;
    match name {
        "synth" => commands::synth(&cfg),
        "select" => commands::select(&cfg),
        "shap" => commands::shap(&cfg, m.get_flag("verify"), m.get_flag("verify-exact")),
        "bench" => commands::bench(&cfg, m.get_flag("per-seed")),
        _ => unreachable!("clap rejects unknown subcommands"),
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    match run(name, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_is_well_formed() {
        cli().debug_assert();
    }

    #[test]
    fn shorthand_and_full_flags() {
        let m = cli()
            .try_get_matches_from(["shapshift", "select", "--q-low", "0.2", "--selector.q-high", "0.7"])
            .unwrap();
        let (_, sub) = m.subcommand().unwrap();
        let c = resolve(sub).unwrap();
        assert_eq!(c.selector.quantiles.q_low(), 0.2);
        assert_eq!(c.selector.quantiles.q_high(), 0.7);
        // seed exists in several sections, so it has no shorthand
        assert!(cli().try_get_matches_from(["shapshift", "select", "--seed", "1"]).is_err());
    }
}
