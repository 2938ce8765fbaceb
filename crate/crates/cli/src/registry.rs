//! Command registry: every subcommand implements [`Command`] and is
//! registered by name; dispatch happens at runtime from argv.

use clap::ArgMatches;

use crate::context::Context;
use crate::error::CliResult;

pub trait Command {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    /// Attach the command's arguments to a blank clap subcommand.
    fn configure(&self, cmd: clap::Command) -> clap::Command;
    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()>;
    /// Run the command's built-in checks of its trivial cases.
    fn selftest(&self, ctx: &Context) -> CliResult<()>;
}

pub struct Registry {
    commands: Vec<Box<dyn Command>>,
}

impl Registry {
    pub fn new(commands: Vec<Box<dyn Command>>) -> Self {
        Registry { commands }
    }

    pub fn find(&self, name: &str) -> Option<&dyn Command> {
        self.commands.iter().find(|c| c.name() == name).map(|c| c.as_ref())
    }

    /// Build the full clap command tree from the registered commands.
    pub fn clap_command(&self) -> clap::Command {
        let mut root = clap::Command::new("fpcav")
            .about("Membrane-microcavity simulation and analysis toolkit")
            .subcommand_required(true)
            .arg_required_else_help(true)
            .arg(
                clap::Arg::new("out-dir")
                    .long("out-dir")
                    .value_name("DIR")
                    .global(true)
                    .help("Directory for output artifacts (default: current directory)"),
            )
            .arg(
                clap::Arg::new("defaults")
                    .long("defaults")
                    .value_name("FILE")
                    .global(true)
                    .help("Defaults file overriding the shipped defaults.toml"),
            );
        for command in &self.commands {
            let sub = clap::Command::new(command.name()).about(command.about()).arg(
                clap::Arg::new("selftest")
                    .long("selftest")
                    .action(clap::ArgAction::SetTrue)
                    .help("Run the command's built-in trivial-case checks and exit"),
            );
            root = root.subcommand(command.configure(sub));
        }
        root
    }
}
