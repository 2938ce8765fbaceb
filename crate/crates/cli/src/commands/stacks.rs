//! Stack-level commands: spectra, stopbands and thickness refinement.

use clap::ArgMatches;

use fpcav_core::io::format_spectrum;
use fpcav_core::spectrafit::MeasuredSpectrum;
use fpcav_core::stack::{LayerStack, Material, StackDocument};
use fpcav_core::tmm;

use crate::args::{arg, f64_or, usize_or};
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::registry::Command;

/// Resolve --stack / --builtin into a layer stack.
pub fn resolve_stack(args: &ArgMatches, ctx: &Context) -> CliResult<LayerStack> {
    match (args.get_one::<String>("stack"), args.get_one::<String>("builtin")) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            Ok(StackDocument::parse(&text)?.build()?)
        }
        (None, Some(name)) => match name.as_str() {
            "bottom-mirror" => ctx.defaults.bottom_mirror(),
            "top-mirror" => ctx.defaults.top_mirror(),
            "cavity" => Ok(ctx.defaults.assembly()?.flatten()),
            other => Err(CliError::Usage(format!(
                "unknown builtin '{other}' (expected bottom-mirror, top-mirror or cavity)"
            ))),
        },
        (None, None) => Err(CliError::Usage("need --stack FILE or --builtin NAME".into())),
        (Some(_), Some(_)) => {
            Err(CliError::Usage("--stack and --builtin are mutually exclusive".into()))
        }
    }
}

fn stack_args(cmd: clap::Command) -> clap::Command {
    cmd.arg(arg("stack", "Stack-definition document (JSON)"))
        .arg(arg("builtin", "Built-in stack: bottom-mirror, top-mirror or cavity"))
}

pub struct StackSpectrumCommand;

impl Command for StackSpectrumCommand {
    fn name(&self) -> &'static str {
        "stack-spectrum"
    }

    fn about(&self) -> &'static str {
        "Reflectance/transmittance spectrum of a multilayer stack"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        stack_args(cmd)
            .arg(arg("lambda-min-nm", "Start of the wavelength grid [450]"))
            .arg(arg("lambda-max-nm", "End of the wavelength grid [900]"))
            .arg(arg("points", "Number of grid points [2251]"))
            .arg(arg("output", "Artifact file name [spectrum.tsv]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let stack = resolve_stack(args, ctx)?;
        let lo = f64_or(args, "lambda-min-nm", 450.0)?;
        let hi = f64_or(args, "lambda-max-nm", 900.0)?;
        let points = usize_or(args, "points", 2251)?;
        if !(hi > lo && lo > 0.0) || points < 2 {
            return Err(CliError::Usage("need 0 < lambda-min < lambda-max and points >= 2".into()));
        }
        let grid = tmm::linspace(lo, hi, points);
        let spectrum = tmm::spectrum(&stack, &grid)?;
        let default_name = String::from("spectrum.tsv");
        let name = args.get_one::<String>("output").unwrap_or(&default_name);
        let path = ctx.write_artifact(name, &format_spectrum(&spectrum))?;
        let r_max = spectrum.reflectance.iter().cloned().fold(f64::MIN, f64::max);
        println!(
            "stack-spectrum: {} layers, {} points, max R = {:.6} -> {}",
            stack.layers.len(),
            points,
            r_max,
            path.display()
        );
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // empty stack between identical media reflects nothing
        let stack = LayerStack::bare_interface(Material::air(), Material::air());
        let grid = tmm::linspace(450.0, 900.0, 46);
        let spectrum = tmm::spectrum(&stack, &grid)?;
        for (i, r) in spectrum.reflectance.iter().enumerate() {
            if r.abs() > 1e-12 {
                return Err(CliError::Numeric(format!(
                    "air-air interface reflects at point {i}: R={r}"
                )));
            }
        }
        println!("selftest stack-spectrum: empty air-air stack has R = 0 everywhere");
        Ok(())
    }
}

pub struct StopbandCommand;

impl Command for StopbandCommand {
    fn name(&self) -> &'static str {
        "stopband"
    }

    fn about(&self) -> &'static str {
        "Locate a mirror's high-reflectivity stopband"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        stack_args(cmd)
            .arg(arg("lambda-min-nm", "Start of the scan [450]"))
            .arg(arg("lambda-max-nm", "End of the scan [900]"))
            .arg(arg("points", "Number of grid points [4501]"))
            .arg(arg("threshold", "Reflectance threshold defining the band [0.99]"))
            .arg(
                clap::Arg::new("probe-nm")
                    .long("probe-nm")
                    .value_name("NM")
                    .action(clap::ArgAction::Append)
                    .help("Wavelength(s) to test against the band (repeatable)"),
            )
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let stack = resolve_stack(args, ctx)?;
        let lo = f64_or(args, "lambda-min-nm", 450.0)?;
        let hi = f64_or(args, "lambda-max-nm", 900.0)?;
        let points = usize_or(args, "points", 4501)?;
        let threshold = f64_or(args, "threshold", tmm::DEFAULT_STOPBAND_THRESHOLD)?;
        let grid = tmm::linspace(lo, hi, points);
        let spectrum = tmm::spectrum(&stack, &grid)?;
        let band = tmm::stopband(&spectrum, threshold)?;
        let mut report = format!(
            "stopband threshold {threshold}\ncenter_nm {:.3}\nlow_edge_nm {:.3}\nhigh_edge_nm {:.3}\n",
            band.center_nm, band.low_edge_nm, band.high_edge_nm
        );
        if let Some(probes) = args.get_many::<String>("probe-nm") {
            for p in probes {
                let lam: f64 = p
                    .parse()
                    .map_err(|_| CliError::Usage(format!("--probe-nm expects a number, got '{p}'")))?;
                report.push_str(&format!(
                    "probe {lam} nm: {}\n",
                    if band.contains(lam) { "inside" } else { "outside" }
                ));
            }
        }
        let path = ctx.write_artifact("stopband.txt", &report)?;
        print!("{report}");
        println!("-> {}", path.display());
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // a bare interface never reaches the threshold: not-found error
        let stack = LayerStack::bare_interface(Material::air(), Material::diamond());
        let grid = tmm::linspace(450.0, 900.0, 91);
        let spectrum = tmm::spectrum(&stack, &grid)?;
        match tmm::stopband(&spectrum, 0.99) {
            Err(fpcav_core::Error::NotFound(_)) => {
                println!("selftest stopband: bare interface correctly reports no stopband");
                Ok(())
            }
            other => Err(CliError::Numeric(format!(
                "expected a not-found error on a bare interface, got {other:?}"
            ))),
        }
    }
}

pub struct RefineCommand;

impl Command for RefineCommand {
    fn name(&self) -> &'static str {
        "refine"
    }

    fn about(&self) -> &'static str {
        "Refine per-layer thicknesses against a measured transmission spectrum"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        stack_args(cmd)
            .arg(arg("measured", "Measured spectrum file (wavelength_nm counts)"))
            .arg(arg("tolerance", "Per-layer thickness tolerance [0.03]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let stack = resolve_stack(args, ctx)?;
        let measured_path = args
            .get_one::<String>("measured")
            .ok_or_else(|| CliError::Usage("missing required --measured".into()))?;
        let text = std::fs::read_to_string(measured_path)
            .map_err(|e| CliError::Input(format!("{measured_path}: {e}")))?;
        let measured = MeasuredSpectrum::parse_delimited(&text)?;
        let tolerance = f64_or(args, "tolerance", tmm::DEFAULT_THICKNESS_TOLERANCE)?;
        let result = tmm::refine_stack(&stack, &measured, tolerance)?;
        let doc = StackDocument::describe(&result.stack);
        let stack_path = ctx.write_artifact("refined_stack.json", &doc.to_json())?;
        let mut report = format!(
            "refinement tolerance {tolerance}\ninitial_rms_residual {:.6e}\nfinal_rms_residual {:.6e}\nconverged {}\nevaluations {}\n",
            result.initial_residual, result.residual, result.converged, result.evaluations
        );
        for (i, m) in result.multipliers.iter().enumerate() {
            report.push_str(&format!("layer {i} multiplier {m:.6}\n"));
        }
        let report_path = ctx.write_artifact("refine_report.txt", &report)?;
        println!(
            "refine: residual {:.3e} -> {:.3e} (converged: {}) -> {}, {}",
            result.initial_residual,
            result.residual,
            result.converged,
            stack_path.display(),
            report_path.display()
        );
        Ok(())
    }

    fn selftest(&self, ctx: &Context) -> CliResult<()> {
        // zero tolerance returns the stack unchanged
        let mirror = fpcav_core::stack::build_quarter_wave_dbr(
            625.0,
            3,
            ctx.defaults.tantala()?,
            ctx.defaults.silica()?,
            ctx.defaults.silica()?,
        )?;
        let grid = tmm::linspace(500.0, 780.0, 41);
        let model = tmm::spectrum(&mirror, &grid)?;
        let measured = MeasuredSpectrum::new(grid, model.transmittance, None, "model")?;
        let result = tmm::refine_stack(&mirror, &measured, 0.0)?;
        if result.stack != mirror || result.multipliers.iter().any(|&m| m != 1.0) {
            return Err(CliError::Numeric(
                "zero-tolerance refinement changed the stack".into(),
            ));
        }
        println!("selftest refine: zero tolerance returns the stack unchanged");
        // identity fit keeps the residual at zero
        let identity = tmm::refine_stack(&mirror, &measured, 0.03)?;
        if identity.residual > 1e-9 {
            return Err(CliError::Numeric(format!(
                "identity fit residual {:.3e} should be ~0",
                identity.residual
            )));
        }
        println!("selftest refine: identity fit residual {:.1e}", identity.residual);
        Ok(())
    }
}
