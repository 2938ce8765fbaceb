//! `fpcav` — command-line front end of the membrane-microcavity toolkit.
//!
//! Exit codes: 0 success, 2 usage error, 3 input-format error,
//! 4 numeric/domain failure.

mod args;
mod commands;
mod context;
mod error;
mod registry;

use std::path::Path;

use context::{Context, Defaults};
use error::CliError;

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let registry = commands::build_registry();
    let matches = match registry.clap_command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            // help and version are ordinary output, not usage errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("error: usage: {}", e.render().to_string().lines().next().unwrap_or(""));
            return 2;
        }
    };
    let (name, sub) = match matches.subcommand() {
        Some(pair) => pair,
        None => {
            eprintln!("error: usage: missing subcommand");
            return 2;
        }
    };
    let defaults = match Defaults::load(matches.get_one::<String>("defaults").map(Path::new)) {
        Ok(d) => d,
        Err(e) => return fail(&e),
    };
    let out_dir = matches
        .get_one::<String>("out-dir")
        .map(Into::into)
        .unwrap_or_else(|| std::path::PathBuf::from("."));
    let ctx = Context { defaults, out_dir };
    let command = registry.find(name).expect("subcommand came from the registry");
    let result = if sub.get_flag("selftest") {
        command.selftest(&ctx)
    } else {
        command.run(sub, &ctx)
    };
    match result {
        Ok(()) => 0,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> i32 {
    eprintln!("error: {}: {}", e.kind(), e.message());
    e.exit_code()
}
