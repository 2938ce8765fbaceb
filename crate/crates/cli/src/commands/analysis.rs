//! Measured-spectrum analysis commands and Raman unit conversions.

use clap::ArgMatches;

use fpcav_core::raman::{
    deconvolve_lorentzian, linewidth_convert, phonon_lifetime_ps, stokes_wavelength,
    LinewidthUnit,
};
use fpcav_core::spectrafit::{
    enhancement_ratio, finesse_from_length_scan, fit_lorentzian, fit_lorentzian_product,
    lorentzian, power_linearity, MeasuredSpectrum,
};

use crate::args::{arg, f64_or, opt_f64, req_f64};
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::registry::Command;

fn read_spectrum(path: &str) -> CliResult<MeasuredSpectrum> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    Ok(MeasuredSpectrum::parse_delimited(&text)?)
}

pub struct FitSpectrumCommand;

impl Command for FitSpectrumCommand {
    fn name(&self) -> &'static str {
        "fit-spectrum"
    }

    fn about(&self) -> &'static str {
        "Lorentzian or cavity-times-Stokes product fit of a measured spectrum"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("input", "Spectrum file (wavelength_nm counts)"))
            .arg(
                clap::Arg::new("product")
                    .long("product")
                    .action(clap::ArgAction::SetTrue)
                    .help("Fit the product of a free cavity and a fixed Stokes Lorentzian"),
            )
            .arg(arg("lambda-s-nm", "Fixed Stokes center for --product [defaults]"))
            .arg(arg("delta-lambda-s-pm", "Fixed Stokes FWHM for --product [defaults]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let input = args
            .get_one::<String>("input")
            .ok_or_else(|| CliError::Usage("missing required --input".into()))?;
        let spectrum = read_spectrum(input)?;
        let report = if args.get_flag("product") {
            let ls = f64_or(args, "lambda-s-nm", ctx.defaults.budget.lambda_s_nm)?;
            let dls = f64_or(args, "delta-lambda-s-pm", ctx.defaults.budget.stokes_fwhm_pm)?;
            let fit = fit_lorentzian_product(&spectrum, ls, dls)?;
            format!(
                "lorentzian product fit of {input}\n\
                 fixed stokes_center_nm {ls}\nfixed stokes_fwhm_pm {dls}\n\
                 cavity_center_nm {:.5}\ncavity_fwhm_pm {:.3}\ncavity_q {:.1}\n\
                 amplitude {:.4}\noffset {:.4}\nresidual_rms {:.4e}\n",
                fit.cavity_center_nm,
                fit.cavity_fwhm_pm,
                fit.cavity_q,
                fit.amplitude,
                fit.offset,
                fit.residual_rms
            )
        } else {
            let fit = fit_lorentzian(&spectrum)?;
            format!(
                "lorentzian fit of {input}\n\
                 center_nm {:.5} +- {:.5}\nfwhm_pm {:.3} +- {:.3}\n\
                 amplitude {:.4} +- {:.4}\noffset {:.4} +- {:.4}\nresidual_rms {:.4e}\n",
                fit.center_nm,
                fit.stderr[0],
                fit.fwhm_pm,
                fit.stderr[1],
                fit.amplitude,
                fit.stderr[2],
                fit.offset,
                fit.stderr[3],
                fit.residual_rms
            )
        };
        let path = ctx.write_artifact("fit_report.txt", &report)?;
        print!("{report}");
        println!("-> {}", path.display());
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // noiseless round trip
        let grid: Vec<f64> = (0..241).map(|i| 572.3 + 0.8 * i as f64 / 240.0).collect();
        let counts: Vec<f64> =
            grid.iter().map(|l| 900.0 * lorentzian(*l, 572.67, 0.071) + 12.0).collect();
        let spec = MeasuredSpectrum::new(grid.clone(), counts, None, "selftest")?;
        let fit = fit_lorentzian(&spec)?;
        if (fit.center_nm - 572.67).abs() > 1e-3 || (fit.fwhm_pm - 71.0).abs() > 0.1 {
            return Err(CliError::Numeric(format!(
                "round trip off: center {} fwhm {}",
                fit.center_nm, fit.fwhm_pm
            )));
        }
        println!("selftest fit-spectrum: noiseless round trip recovers the generator");
        // a flat spectrum is a fit error, not a spurious result
        let flat = MeasuredSpectrum::new(grid, vec![50.0; 241], None, "flat")?;
        if fit_lorentzian(&flat).is_ok() {
            return Err(CliError::Numeric("flat spectrum produced a fit".into()));
        }
        println!("selftest fit-spectrum: flat spectrum is rejected");
        Ok(())
    }
}

pub struct FinesseCommand;

impl Command for FinesseCommand {
    fn name(&self) -> &'static str {
        "finesse"
    }

    fn about(&self) -> &'static str {
        "Finesse from a fundamental-mode intensity trace versus air gap"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("input", "Length-scan file (t_a_nm intensity)"))
            .arg(arg("lambda-nm", "Resonance wavelength of the scan [defaults]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let input = args
            .get_one::<String>("input")
            .ok_or_else(|| CliError::Usage("missing required --input".into()))?;
        let scan = read_spectrum(input)?;
        let lambda = f64_or(args, "lambda-nm", ctx.defaults.budget.lambda_s_nm)?;
        let result = finesse_from_length_scan(&scan.wavelengths_nm, &scan.counts, lambda)?;
        let report = format!(
            "finesse from length scan {input}\nlambda_nm {lambda}\n\
             gap_center_nm {:.3}\ngap_fwhm_nm {:.4}\nfinesse {:.1}\n",
            result.gap_center_nm, result.gap_fwhm_nm, result.finesse
        );
        let path = ctx.write_artifact("finesse.txt", &report)?;
        print!("{report}");
        println!("-> {}", path.display());
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // doubling the scan linewidth halves the finesse
        let gaps: Vec<f64> = (0..321).map(|i| 2590.0 + 16.0 * i as f64 / 320.0).collect();
        let mk = |fwhm: f64| -> CliResult<f64> {
            let y: Vec<f64> =
                gaps.iter().map(|g| 800.0 * lorentzian(*g, 2598.0, fwhm) + 25.0).collect();
            Ok(finesse_from_length_scan(&gaps, &y, 572.67)?.finesse)
        };
        let f1 = mk(0.818)?;
        let f2 = mk(1.636)?;
        if (f1 / f2 - 2.0).abs() > 0.05 {
            return Err(CliError::Numeric(format!(
                "finesse should halve when the width doubles: {f1} vs {f2}"
            )));
        }
        println!("selftest finesse: reciprocal width scaling holds ({f1:.0} vs {f2:.0})");
        Ok(())
    }
}

pub struct EnhancementCommand;

impl Command for EnhancementCommand {
    fn name(&self) -> &'static str {
        "enhancement"
    }

    fn about(&self) -> &'static str {
        "Ratio of integrated on-cavity to off-cavity spectra"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("on", "On-cavity spectrum file"))
            .arg(arg("off", "Off-cavity (confocal) spectrum file"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let on_path = args
            .get_one::<String>("on")
            .ok_or_else(|| CliError::Usage("missing required --on".into()))?;
        let off_path = args
            .get_one::<String>("off")
            .ok_or_else(|| CliError::Usage("missing required --off".into()))?;
        let on = read_spectrum(on_path)?;
        let off = read_spectrum(off_path)?;
        let ratio = enhancement_ratio(&on, &off)?;
        let report = format!(
            "integrated enhancement\non {} (t_int {:?} s, power {:?} mW)\noff {} (t_int {:?} s, power {:?} mW)\nratio {:.3}\n",
            on_path, on.integration_time_s, on.power_mw, off_path, off.integration_time_s,
            off.power_mw, ratio
        );
        let path = ctx.write_artifact("enhancement.txt", &report)?;
        print!("{report}");
        println!("-> {}", path.display());
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        let grid: Vec<f64> = (0..101).map(|i| 572.0 + 1.4 * i as f64 / 100.0).collect();
        let y: Vec<f64> = grid.iter().map(|l| 500.0 * lorentzian(*l, 572.67, 0.071)).collect();
        let a = MeasuredSpectrum::new(grid.clone(), y.clone(), Some(1.0), "on")?;
        let b = MeasuredSpectrum::new(grid, y, Some(1.0), "off")?;
        let r = enhancement_ratio(&a, &b)?;
        if (r - 1.0).abs() > 1e-12 {
            return Err(CliError::Numeric(format!("identical spectra should give 1, got {r}")));
        }
        println!("selftest enhancement: identical inputs give ratio 1.0");
        Ok(())
    }
}

pub struct RamanConvertCommand;

impl Command for RamanConvertCommand {
    fn name(&self) -> &'static str {
        "raman-convert"
    }

    fn about(&self) -> &'static str {
        "Stokes kinematics, linewidth unit conversions and phonon lifetimes"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("pump-nm", "Pump wavelength for a Stokes conversion"))
            .arg(arg("shift-invcm", "Raman shift in 1/cm [defaults]"))
            .arg(arg("linewidth", "Linewidth value to convert"))
            .arg(arg("from", "Linewidth unit of --linewidth: pm, ghz or q"))
            .arg(arg("to", "Target linewidth unit: pm, ghz or q"))
            .arg(arg("at-nm", "Reference wavelength for pm/q conversions"))
            .arg(arg("lifetime-from-ghz", "Phonon lifetime from a Lorentzian FWHM"))
            .arg(arg("deconvolve-total-ghz", "Total width for a Lorentzian deconvolution"))
            .arg(arg("deconvolve-component-ghz", "Component width to remove"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let mut did_something = false;
        let pump = opt_f64(args, "pump-nm")?;
        let shift = opt_f64(args, "shift-invcm")?;
        if pump.is_some() || shift.is_some() {
            // missing halves fall back to the configured pump and shift
            let pump = pump.unwrap_or(ctx.defaults.raman.pump_nm);
            let shift = shift.unwrap_or(ctx.defaults.raman.shift_inv_cm);
            let stokes = stokes_wavelength(pump, shift)?;
            println!("stokes: pump {pump} nm + shift {shift} /cm -> {stokes:.3} nm");
            did_something = true;
        }
        if let Some(value) = opt_f64(args, "linewidth")? {
            let from: LinewidthUnit = args
                .get_one::<String>("from")
                .ok_or_else(|| CliError::Usage("--linewidth needs --from".into()))?
                .parse()
                .map_err(|e: fpcav_core::Error| CliError::Usage(e.to_string()))?;
            let to: LinewidthUnit = args
                .get_one::<String>("to")
                .ok_or_else(|| CliError::Usage("--linewidth needs --to".into()))?
                .parse()
                .map_err(|e: fpcav_core::Error| CliError::Usage(e.to_string()))?;
            let reference = opt_f64(args, "at-nm")?;
            let converted = linewidth_convert(value, from, to, reference)?;
            println!("linewidth: {value} {from:?} -> {converted:.4} {to:?}");
            did_something = true;
        }
        if let Some(ghz) = opt_f64(args, "lifetime-from-ghz")? {
            let tau = phonon_lifetime_ps(ghz)?;
            println!("phonon lifetime: {ghz} GHz -> {tau:.3} ps");
            did_something = true;
        }
        if let Some(total) = opt_f64(args, "deconvolve-total-ghz")? {
            let component = req_f64(args, "deconvolve-component-ghz")?;
            let remainder = deconvolve_lorentzian(total, component)?;
            println!("deconvolve: {total} GHz minus {component} GHz -> {remainder:.3} GHz");
            did_something = true;
        }
        if !did_something {
            return Err(CliError::Usage(
                "nothing to do: pass --pump-nm, --linewidth, --lifetime-from-ghz or --deconvolve-total-ghz"
                    .into(),
            ));
        }
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        let same = stokes_wavelength(532.0, 0.0)?;
        if (same - 532.0).abs() > 1e-12 {
            return Err(CliError::Numeric("zero shift should be the identity".into()));
        }
        println!("selftest raman-convert: zero shift leaves the wavelength unchanged");
        let x = deconvolve_lorentzian(42.0, 0.0)?;
        if (x - 42.0).abs() > 1e-12 {
            return Err(CliError::Numeric("zero component should be the identity".into()));
        }
        println!("selftest raman-convert: zero-width deconvolution is the identity");
        let tau_s = phonon_lifetime_ps(44.2)? * 1e-12;
        let product = tau_s * 44.2e9;
        if (product - 1.0 / (2.0 * std::f64::consts::PI)).abs() > 1e-15 {
            return Err(CliError::Numeric("tau * dnu should equal 1/(2 pi)".into()));
        }
        println!("selftest raman-convert: lifetime-linewidth product is 1/(2 pi)");
        Ok(())
    }
}

pub struct LinearityCommand;

impl Command for LinearityCommand {
    fn name(&self) -> &'static str {
        "linearity"
    }

    fn about(&self) -> &'static str {
        "Power-linearity check of an integrated-signal series"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("input", "Series file (power_mW integrated_signal)"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let input = args
            .get_one::<String>("input")
            .ok_or_else(|| CliError::Usage("missing required --input".into()))?;
        let series = read_spectrum(input)?;
        let points: Vec<(f64, f64)> = series
            .wavelengths_nm
            .iter()
            .zip(&series.counts)
            .map(|(p, s)| (*p, *s))
            .collect();
        let result = power_linearity(&points)?;
        let report = format!(
            "power linearity of {input}\nexponent {:.4}\nlinear_slope {:.6}\nverdict {}\n",
            result.exponent, result.slope, result.verdict
        );
        let path = ctx.write_artifact("linearity.txt", &report)?;
        print!("{report}");
        println!("-> {}", path.display());
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        let linear: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 4.0 * i as f64)).collect();
        let r = power_linearity(&linear)?;
        if (r.exponent - 1.0).abs() > 1e-9 {
            return Err(CliError::Numeric(format!("exact series exponent {}", r.exponent)));
        }
        println!("selftest linearity: exactly linear series gives exponent 1.000");
        let quad: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, (i * i) as f64)).collect();
        let r = power_linearity(&quad)?;
        if (r.exponent - 2.0).abs() > 1e-9
            || r.verdict != fpcav_core::spectrafit::LinearityVerdict::SuperLinear
        {
            return Err(CliError::Numeric("quadratic series should flag super-linear".into()));
        }
        println!("selftest linearity: quadratic series flags super-linear");
        Ok(())
    }
}
