//! Small argument-extraction helpers returning usage errors.

use clap::ArgMatches;

use crate::error::{CliError, CliResult};

pub fn req_f64(args: &ArgMatches, name: &str) -> CliResult<f64> {
    let raw = args
        .get_one::<String>(name)
        .ok_or_else(|| CliError::Usage(format!("missing required --{name}")))?;
    raw.parse::<f64>()
        .map_err(|_| CliError::Usage(format!("--{name} expects a number, got '{raw}'")))
}

pub fn opt_f64(args: &ArgMatches, name: &str) -> CliResult<Option<f64>> {
    match args.get_one::<String>(name) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<f64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("--{name} expects a number, got '{raw}'"))),
    }
}

pub fn f64_or(args: &ArgMatches, name: &str, default: f64) -> CliResult<f64> {
    Ok(opt_f64(args, name)?.unwrap_or(default))
}

pub fn usize_or(args: &ArgMatches, name: &str, default: usize) -> CliResult<usize> {
    match args.get_one::<String>(name) {
        None => Ok(default),
        Some(raw) => raw
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("--{name} expects an integer, got '{raw}'"))),
    }
}

pub fn arg(name: &'static str, help: &'static str) -> clap::Arg {
    clap::Arg::new(name).long(name).value_name("VALUE").help(help)
}
