pub mod analysis;
pub mod cavity;
pub mod gauss;
pub mod quantum;
pub mod stacks;

use crate::registry::{Command, Registry};

/// All subcommands, registered by name.
pub fn build_registry() -> Registry {
    let commands: Vec<Box<dyn Command>> = vec![
        Box::new(stacks::StackSpectrumCommand),
        Box::new(stacks::StopbandCommand),
        Box::new(stacks::RefineCommand),
        Box::new(cavity::ModeMapCommand),
        Box::new(cavity::FitGeometryCommand),
        Box::new(gauss::GaussModesCommand),
        Box::new(gauss::RenderModeCommand),
        Box::new(quantum::QuantizeCommand),
        Box::new(quantum::PurcellCommand),
        Box::new(quantum::BudgetCommand),
        Box::new(analysis::FitSpectrumCommand),
        Box::new(analysis::FinesseCommand),
        Box::new(analysis::EnhancementCommand),
        Box::new(analysis::RamanConvertCommand),
        Box::new(analysis::LinearityCommand),
    ];
    Registry::new(commands)
}
