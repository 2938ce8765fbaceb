//! Field quantization, Purcell factor and the enhancement budget.

use clap::ArgMatches;

use fpcav_core::io::format_field;
use fpcav_core::purcell::{
    enhancement_budget, format_budget_report, mode_volume, predict_enhancement, purcell_factor,
    quantize_field, BudgetInputs,
};
use fpcav_core::tmm::FieldProfile;

use crate::args::{arg, f64_or, req_f64};
use crate::commands::cavity::resolve_assembly;
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::registry::Command;

pub struct QuantizeCommand;

impl Command for QuantizeCommand {
    fn name(&self) -> &'static str {
        "quantize"
    }

    fn about(&self) -> &'static str {
        "Vacuum-field profile of the cavity, physically normalized"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("t-d-nm", "Membrane thickness override"))
            .arg(arg("t-a-nm", "Air gap override"))
            .arg(arg("lambda-s-nm", "Stokes wavelength [defaults]"))
            .arg(arg("w-i-um", "Intensity waist [defaults]"))
            .arg(arg("sampling-nm", "Field export step [1.0]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let assembly = resolve_assembly(args, ctx)?;
        let lambda = f64_or(args, "lambda-s-nm", ctx.defaults.budget.lambda_s_nm)?;
        let w_i = f64_or(args, "w-i-um", ctx.defaults.budget.w_intensity_um)?;
        let step = f64_or(args, "sampling-nm", 1.0)?;
        let crossings = fpcav_core::coupledcavity::crossings_at_wavelength(
            &assembly,
            lambda,
            (assembly.air_gap_nm - 0.4 * lambda).max(1.0),
            assembly.air_gap_nm + 0.4 * lambda,
        )?;
        let t_a = crossings
            .into_iter()
            .min_by(|a, b| {
                (a - assembly.air_gap_nm)
                    .abs()
                    .total_cmp(&(b - assembly.air_gap_nm).abs())
            })
            .ok_or_else(|| CliError::Numeric("no resonance near the nominal air gap".into()))?;
        let tuned = assembly.with_air_gap(t_a);
        let profile = fpcav_core::tmm::field_profile(&tuned.flatten(), lambda)?;
        let quantized = quantize_field(&profile, w_i, lambda)?;
        let host = &assembly.membrane_material;
        let volume = mode_volume(&quantized, host.refractive_index, &host.name)?;
        let samples = quantized.profile.samples(step)?;
        let field_path = ctx.write_artifact("field.tsv", &format_field(&samples))?;
        let report = format!(
            "field quantization at lambda {lambda} nm (air gap tuned to {t_a:.2} nm)\n\
             w_intensity_um {w_i}\n\
             max_e_in_{}_kv_per_m {:.3}\n\
             v_eff_lambda_n_cubed {:.3}\nv_eff_um3 {:.4}\n\
             normalization_ratio {:.9}\n",
            host.name,
            volume.e_max_v_per_m / 1e3,
            volume.lambda_over_n_cubed,
            volume.cubic_um,
            quantized.normalization_ratio()
        );
        let report_path = ctx.write_artifact("quantize_report.txt", &report)?;
        print!("{report}");
        println!("-> {}, {}", field_path.display(), report_path.display());
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // normalization is gauge invariant and scales as 1/w_I
        let lam = 572.67;
        let make = |amp: f64| {
            FieldProfile::standing_wave(fpcav_core::stack::Material::air(), lam, 6, amp)
        };
        let e1 = quantize_field(&make(1.0), 0.77, lam)?.max_e_in_material("air").0;
        let e2 = quantize_field(&make(55.5), 0.77, lam)?.max_e_in_material("air").0;
        if (e1 - e2).abs() / e1 > 1e-12 {
            return Err(CliError::Numeric("quantization is not gauge invariant".into()));
        }
        let e_wide = quantize_field(&make(1.0), 1.54, lam)?.max_e_in_material("air").0;
        if (e1 / e_wide - 2.0).abs() > 1e-9 {
            return Err(CliError::Numeric("field does not scale as 1/w_I".into()));
        }
        println!("selftest quantize: gauge invariance and 1/w_I scaling hold");
        Ok(())
    }
}

pub struct PurcellCommand;

impl Command for PurcellCommand {
    fn name(&self) -> &'static str {
        "purcell"
    }

    fn about(&self) -> &'static str {
        "Purcell factor from Q, mode volume and profile averaging"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("q", "Cavity quality factor"))
            .arg(arg("v-eff", "Mode volume in (lambda/n)^3 units"))
            .arg(arg("averaging", "Field-profile averaging [0.5]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let q = req_f64(args, "q")?;
        let v = req_f64(args, "v-eff")?;
        let averaging = f64_or(args, "averaging", ctx.defaults.budget.averaging)?;
        let f = purcell_factor(q, v, averaging)?;
        println!("purcell: F_P = {f:.4} (Q = {q}, V = {v} (lambda/n)^3, averaging = {averaging})");
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        let f = purcell_factor(0.0, 84.9, 0.5)?;
        if (f - 1.0).abs() > 1e-12 {
            return Err(CliError::Numeric(format!("Q -> 0 limit should be 1, got {f}")));
        }
        println!("selftest purcell: Q -> 0 gives no enhancement (F_P = 1)");
        Ok(())
    }
}

pub struct BudgetCommand;

impl Command for BudgetCommand {
    fn name(&self) -> &'static str {
        "budget"
    }

    fn about(&self) -> &'static str {
        "Full enhancement budget: quantization, Purcell factor and efficiencies"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("t-d-nm", "Membrane thickness override"))
            .arg(arg("t-a-nm", "Air gap override"))
            .arg(arg("lambda-s-nm", "Stokes wavelength [defaults]"))
            .arg(arg("q-cavity", "Cavity Q on resonance [defaults]"))
            .arg(arg("stokes-fwhm-pm", "Stokes linewidth [defaults]"))
            .arg(arg("w-i-um", "Intensity waist [defaults]"))
            .arg(arg("na", "Collection NA of the reference objective [defaults]"))
            .arg(arg("averaging", "Purcell averaging [defaults]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let assembly = resolve_assembly(args, ctx)?;
        let d = &ctx.defaults.budget;
        let inputs = BudgetInputs {
            lambda_s_nm: f64_or(args, "lambda-s-nm", d.lambda_s_nm)?,
            q_cavity: f64_or(args, "q-cavity", d.q_cavity)?,
            stokes_fwhm_pm: f64_or(args, "stokes-fwhm-pm", d.stokes_fwhm_pm)?,
            w_intensity_um: f64_or(args, "w-i-um", d.w_intensity_um)?,
            na: f64_or(args, "na", ctx.defaults.detection.na_collection)?,
            averaging: f64_or(args, "averaging", d.averaging)?,
        };
        let breakdown = predict_enhancement(&assembly, &inputs)?;
        let mut report =
            format_budget_report(&breakdown, &inputs, Some(d.measured_enhancement));
        // reference line: the high-NA confocal objective used for alignment
        let eta_confocal = fpcav_core::purcell::eta_objective(
            ctx.defaults.detection.na_confocal,
            assembly.membrane_material.refractive_index,
        )?;
        report.push_str(&format!(
            "  eta_objective_na_{}  {eta_confocal:>12.4}   computed (confocal reference)\n",
            ctx.defaults.detection.na_confocal
        ));
        let path = ctx.write_artifact("budget.txt", &report)?;
        print!("{report}");
        println!("-> {}", path.display());
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // the budget is exactly the product of its recorded factors
        let b = enhancement_budget(4.7, 8066.0, 8200.0, 0.4, 0.0139)?;
        let product = b.purcell * b.spectral_overlap * b.eta_cavity / b.eta_objective;
        if b.predicted_ratio != product {
            return Err(CliError::Numeric("budget identity violated".into()));
        }
        // a cavity much broader than the Stokes line has unit overlap
        let wide = enhancement_budget(4.7, 8066.0, 1e-9, 0.4, 0.0139)?;
        if (wide.spectral_overlap - 1.0).abs() > 1e-9 {
            return Err(CliError::Numeric("broad-cavity overlap should approach 1".into()));
        }
        println!("selftest budget: factor identity and broad-cavity limit hold");
        Ok(())
    }
}
