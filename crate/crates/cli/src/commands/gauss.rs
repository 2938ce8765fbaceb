//! Gaussian-optics commands: dispersion ladders and mode images.

use clap::ArgMatches;

use fpcav_core::gaussmodes::{
    beam_waists, effective_length, fit_linecut_waist, hermite_gaussian_image,
    mode_dispersion_map, mode_set, Axis, ModeIndex,
};
use fpcav_core::io::format_dispersion;

use crate::args::{arg, f64_or, req_f64, usize_or};
use crate::context::Context;
use crate::error::{CliError, CliResult};
use crate::registry::Command;

pub struct GaussModesCommand;

impl Command for GaussModesCommand {
    fn name(&self) -> &'static str {
        "gauss-modes"
    }

    fn about(&self) -> &'static str {
        "Transverse-mode dispersion ladder and beam waists"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("lambda-nm", "Probe wavelength [budget lambda_s]"))
            .arg(arg("r-cav-um", "Mirror radius of curvature [defaults]"))
            .arg(arg("l-min-um", "Start of the length range"))
            .arg(arg("l-max-um", "End of the length range"))
            .arg(arg("q-min", "Smallest longitudinal order [1]"))
            .arg(arg("q-max", "Largest longitudinal order [40]"))
            .arg(arg("max-transverse", "Largest n+m [2]"))
            .arg(arg("waists-at-um", "Also print beam waists at this effective length"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let lambda = f64_or(args, "lambda-nm", ctx.defaults.budget.lambda_s_nm)?;
        let r_cav = f64_or(args, "r-cav-um", ctx.defaults.geometry.mirror_radius_um)?;
        let l_lo = req_f64(args, "l-min-um")?;
        let l_hi = req_f64(args, "l-max-um")?;
        let q_min = usize_or(args, "q-min", 1)? as u32;
        let q_max = usize_or(args, "q-max", 40)? as u32;
        let max_t = usize_or(args, "max-transverse", 2)? as u32;
        if q_min < 1 || q_max < q_min {
            return Err(CliError::Usage("need 1 <= q-min <= q-max".into()));
        }
        let modes = mode_set(q_min..=q_max, max_t);
        let points = mode_dispersion_map(lambda, r_cav, l_lo, l_hi, &modes)?;
        let path = ctx.write_artifact("dispersion.tsv", &format_dispersion(&points))?;
        println!(
            "gauss-modes: {} resonances in [{l_lo}, {l_hi}] um at {lambda} nm, R = {r_cav} um -> {}",
            points.len(),
            path.display()
        );
        if let Some(l_eff) = crate::args::opt_f64(args, "waists-at-um")? {
            let w = beam_waists(l_eff, r_cav, lambda)?;
            println!(
                "waists at L = {l_eff} um: w0_I = {:.4} um, w_mirror_I = {:.4} um, average = {:.4} um",
                w.w0_intensity_um,
                w.w_mirror_intensity_um,
                w.representative_intensity_um()
            );
        }
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // planar limit is exact
        for q in [1u32, 7, 23] {
            let l = effective_length(ModeIndex { q, n: 0, m: 0 }, 572.67, f64::INFINITY)?;
            let expect = q as f64 * 0.57267 / 2.0;
            if (l - expect).abs() > 1e-12 {
                return Err(CliError::Numeric(format!(
                    "planar limit off for q={q}: {l} vs {expect}"
                )));
            }
        }
        println!("selftest gauss-modes: planar limit L = q lambda/2 is exact");
        // transverse degeneracy
        let a = effective_length(ModeIndex { q: 14, n: 1, m: 0 }, 572.67, 10.0)?;
        let b = effective_length(ModeIndex { q: 14, n: 0, m: 1 }, 572.67, 10.0)?;
        if a != b {
            return Err(CliError::Numeric("transverse degeneracy broken".into()));
        }
        println!("selftest gauss-modes: (q,1,0) and (q,0,1) are exactly degenerate");
        Ok(())
    }
}

pub struct RenderModeCommand;

impl Command for RenderModeCommand {
    fn name(&self) -> &'static str {
        "render-mode"
    }

    fn about(&self) -> &'static str {
        "Render a Hermite-Gaussian intensity image as a portable graymap"
    }

    fn configure(&self, cmd: clap::Command) -> clap::Command {
        cmd.arg(arg("n", "Transverse order along x [0]"))
            .arg(arg("m", "Transverse order along y [0]"))
            .arg(arg("w-i-um", "Intensity waist [budget w_I]"))
            .arg(arg("pitch-um-per-px", "Pixel pitch [0.05]"))
            .arg(arg("size-px", "Image size in pixels [96]"))
            .arg(arg("output", "Graymap file name [mode.pgm]"))
    }

    fn run(&self, args: &ArgMatches, ctx: &Context) -> CliResult<()> {
        let n = usize_or(args, "n", 0)? as u32;
        let m = usize_or(args, "m", 0)? as u32;
        let w_i = f64_or(args, "w-i-um", ctx.defaults.budget.w_intensity_um)?;
        let pitch = f64_or(args, "pitch-um-per-px", 0.05)?;
        let size = usize_or(args, "size-px", 96)?;
        let image = hermite_gaussian_image(n, m, w_i, pitch, size)?;
        let default_name = String::from("mode.pgm");
        let name = args.get_one::<String>("output").unwrap_or(&default_name);
        let pgm_path = ctx.write_artifact(name, &image.to_pgm())?;
        let meta_name = format!("{name}.meta");
        let meta_path = ctx.write_artifact(&meta_name, &image.metadata())?;
        let mut summary = format!(
            "render-mode: ({n},{m}) at w_I = {w_i} um -> {}, {}",
            pgm_path.display(),
            meta_path.display()
        );
        if n == 0 && m == 0 {
            let fitted = fit_linecut_waist(&image, Axis::X)?;
            summary.push_str(&format!("; linecut waist {fitted:.4} um"));
        }
        println!("{summary}");
        Ok(())
    }

    fn selftest(&self, _ctx: &Context) -> CliResult<()> {
        // (1,0) has a nodal line at x = 0; (0,1) is its 90-degree rotation
        let a = hermite_gaussian_image(1, 0, 0.88, 0.05, 64)?;
        let mid = a.size_px / 2;
        if a.pixel(mid, mid) > 0.05 {
            return Err(CliError::Numeric("missing nodal line in the (1,0) image".into()));
        }
        let b = hermite_gaussian_image(0, 1, 0.88, 0.05, 64)?;
        for iy in 0..a.size_px {
            for ix in 0..a.size_px {
                if (a.pixel(ix, iy) - b.pixel(iy, ix)).abs() > 1e-12 {
                    return Err(CliError::Numeric(
                        "(0,1) is not the rotation of (1,0)".into(),
                    ));
                }
            }
        }
        println!("selftest render-mode: nodal line and 90-degree rotation check out");
        Ok(())
    }
}
