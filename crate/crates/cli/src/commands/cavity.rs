//! Coupled-cavity commands: mode maps and geometry inference.

use clap::ArgMatches;

use fpcav_core::coupledcavity::{
    effective_mode_number, fit_geometry, mode_map, GeometryBounds,
};
use fpcav_core::io::format_mode_map;
use fpcav_core::stack::CavityAssembly;

use crate::args::{arg, f64_or, opt_f64, req_f64};
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::registry::Command;

/// Assembly from defaults with optional per-flag geometry overrides.
pub fn resolve_assembly(args: &ArgMatches, ctx: &Context) -> CliResult<CavityAssembly> {
    let mut assembly = ctx.defaults.assembly()?;
    if let Some(t_d) = opt_f64(args, "t-d-nm")? {
        assembly = assembly.with_membrane_thickness(t_d);
    }
    if let Some(t_a) = opt_f64(args, "t-a-nm")? {
        assembly = assembly.with_air_gap(t_a);
    }
    Ok(assembly)
}

fn assembly_args(cmd: clap::Command) -> clap::Command {
    cmd.arg(arg("t-d-nm", "Membrane thickness override"))
        .arg(arg("t-a-nm", "Air gap override"))
}

pub struct ModeMapCommand;

impl Command for ModeMapCommand {
    fn name(&self) -> &'static str {
        "mode-map"
    }

    fn about(&self) -> &'static str {
        "Resonance wavelengths versus air gap for the membrane cavity"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        assembly_args(cmd)
            .arg(arg("t-a-min-nm", "Start of the air-gap scan"))
            .arg(arg("t-a-max-nm", "End of the air-gap scan"))
            .arg(arg("t-a-step-nm", "Air-gap step [5]"))
            .arg(arg("lambda-min-nm", "Start of the wavelength window"))
            .arg(arg("lambda-max-nm", "End of the wavelength window"))
            .arg(arg("output", "Artifact file name [modemap.tsv]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let assembly = resolve_assembly(args, ctx)?;
        let t_lo = req_f64(args, "t-a-min-nm")?;
        let t_hi = req_f64(args, "t-a-max-nm")?;
        let step = f64_or(args, "t-a-step-nm", 5.0)?;
        let l_lo = req_f64(args, "lambda-min-nm")?;
        let l_hi = req_f64(args, "lambda-max-nm")?;
        let map = mode_map(&assembly, t_lo, t_hi, step, l_lo, l_hi)?;
        let default_name = String::from("modemap.tsv");
        let name = args.get_one::<String>("output").unwrap_or(&default_name);
        let path = ctx.write_artifact(name, &format_mode_map(&map))?;
        let n_res: usize = map.resonances.iter().map(|r| r.len()).sum();
        println!(
            "mode-map: {} gap points, {} resonances, {} branches -> {}",
            map.air_gaps_nm.len(),
            n_res,
            map.branch_ids().len(),
            path.display()
        );
        Ok(())
    }

    fn selftest(&self, ctx: &Context) -> CliResult<()> {
        // tiny scan: branches must be continuous and monotone in wavelength
        let assembly = ctx.defaults.assembly()?;
        let map = mode_map(&assembly, 2580.0, 2620.0, 10.0, 570.0, 576.0)?;
        for id in map.branch_ids() {
            let branch = map.branch(id);
            for w in branch.windows(2) {
                if w[1].1 <= w[0].1 {
                    return Err(CliError::Numeric(format!(
                        "branch {id} is not monotone: {w:?}"
                    )));
                }
            }
        }
        println!("selftest mode-map: branches are continuous and monotone");
        Ok(())
    }
}

pub struct FitGeometryCommand;

impl Command for FitGeometryCommand {
    fn name(&self) -> &'static str {
        "fit-geometry"
    }

    fn about(&self) -> &'static str {
        "Infer membrane thickness and air gap from two branch slopes"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        assembly_args(cmd)
            .arg(arg("m1-pm-per-nm", "Slope of the first fundamental branch"))
            .arg(arg("m2-pm-per-nm", "Slope of the adjacent branch"))
            .arg(arg("lambda-s-nm", "Crossing wavelength [defaults]"))
            .arg(arg("t-d-min-nm", "Membrane search lower bound [300]"))
            .arg(arg("t-d-max-nm", "Membrane search upper bound [1500]"))
            .arg(arg("t-a-min-nm", "Air-gap search lower bound [500]"))
            .arg(arg("t-a-max-nm", "Air-gap search upper bound [6000]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let assembly = resolve_assembly(args, ctx)?;
        let m1 = req_f64(args, "m1-pm-per-nm")?;
        let m2 = req_f64(args, "m2-pm-per-nm")?;
        let lambda = f64_or(args, "lambda-s-nm", ctx.defaults.budget.lambda_s_nm)?;
        let defaults = GeometryBounds::default();
        let bounds = GeometryBounds {
            t_d_nm: (
                f64_or(args, "t-d-min-nm", defaults.t_d_nm.0)?,
                f64_or(args, "t-d-max-nm", defaults.t_d_nm.1)?,
            ),
            t_a_nm: (
                f64_or(args, "t-a-min-nm", defaults.t_a_nm.0)?,
                f64_or(args, "t-a-max-nm", defaults.t_a_nm.1)?,
            ),
        };
        let fit = fit_geometry(&assembly, m1, m2, lambda, bounds)?;
        let report = format!(
            "geometry fit at lambda {lambda} nm\n\
             inputs m1 {m1} pm/nm, m2 {m2} pm/nm\n\
             bounds t_d [{}, {}] nm, t_a [{}, {}] nm\n\
             t_d_nm {:.2}\nt_a_nm {:.2}\n\
             model_m1_pm_per_nm {:.3}\nmodel_m2_pm_per_nm {:.3}\n\
             q1 {}\nq2 {}\nresidual {:.5}\nboundary_solution {}\n",
            bounds.t_d_nm.0,
            bounds.t_d_nm.1,
            bounds.t_a_nm.0,
            bounds.t_a_nm.1,
            fit.t_d_nm,
            fit.t_a_nm,
            fit.m1_pm_per_nm,
            fit.m2_pm_per_nm,
            fit.q1,
            fit.q2,
            fit.residual,
            fit.boundary_solution
        );
        let path = ctx.write_artifact("geometry_fit.txt", &report)?;
        print!("{report}");
        println!("-> {}", path.display());
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // effective mode numbers from the measured slopes
        for (slope, expect) in [(87.0, 23), (83.0, 24), (2000.0, 1)] {
            let n = effective_mode_number(slope)?;
            if n.q != expect {
                return Err(CliError::Numeric(format!(
                    "slope {slope} pm/nm gave q={}, expected {expect}",
                    n.q
                )));
            }
        }
        println!("selftest fit-geometry: slope-to-mode-number assignments are exact");
        Ok(())
    }
}
