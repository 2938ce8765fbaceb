//! Gaussian transverse-mode model of the plano-concave cavity.
//!
//! The resonance condition ties the effective cavity length to the mode
//! indices through
//!
//! ```text
//! L_eff(q,n,m) = [ q + (n+m+1)/pi * arccos(sqrt(g)) ] * lambda/2,
//! g = 1 - L_eff / R_cav,
//! ```
//!
//! solved here by plain fixed-point iteration from `L = q lambda/2`. Beam
//! waists follow from the standard Gaussian-beam relations; `w_I` denotes the
//! 1/e radius of the *intensity* profile, i.e. the field waist divided by
//! sqrt(2), which is the convention that reproduces both quoted mirror and
//! average waists of the reference geometry.

use crate::error::{Error, Result};
use crate::optim::golden_section_min;

/// Cavity mode labels: longitudinal order q >= 1 and transverse orders n, m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub q: u32,
    pub n: u32,
    pub m: u32,
}

impl ModeIndex {
    pub fn new(q: u32, n: u32, m: u32) -> Result<Self> {
        if q < 1 {
            return Err(Error::invalid("longitudinal index q must be >= 1"));
        }
        Ok(ModeIndex { q, n, m })
    }

    pub fn transverse_order(&self) -> u32 {
        self.n + self.m
    }
}

/// Geometry snapshot of a stable Gaussian mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianGeometry {
    pub r_cav_um: f64,
    pub l_eff_um: f64,
    pub wavelength_nm: f64,
    /// Confocal parameter g = 1 - L_eff/R_cav.
    pub g: f64,
}

const MAX_FIXED_POINT_ITERATIONS: usize = 100;
// tighter than the 1e-6 contract so the back-substituted residual of the
// returned length stays below 1e-9 relative
const FIXED_POINT_REL_TOL: f64 = 1e-12;

fn eq_length(q: u32, n: u32, m: u32, wavelength_um: f64, g: f64) -> f64 {
    (q as f64 + (n + m + 1) as f64 / std::f64::consts::PI * g.sqrt().acos()) * wavelength_um / 2.0
}

/// Self-consistent effective length of mode (q,n,m), in micrometers.
///
/// `r_cav_um` may be infinite (planar limit), in which case the result is
/// exactly `q * lambda / 2`.
pub fn effective_length(mode: ModeIndex, wavelength_nm: f64, r_cav_um: f64) -> Result<f64> {
    if !(wavelength_nm > 0.0) {
        return Err(Error::invalid("wavelength must be > 0"));
    }
    if !(r_cav_um > 0.0) {
        return Err(Error::invalid("mirror radius must be > 0"));
    }
    let lambda_um = wavelength_nm * 1e-3;
    let mut l = mode.q as f64 * lambda_um / 2.0;
    if r_cav_um.is_infinite() {
        return Ok(l);
    }
    for _ in 0..MAX_FIXED_POINT_ITERATIONS {
        let g = 1.0 - l / r_cav_um;
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::UnstableGeometry(format!(
                "confocal parameter g = {g:.4} outside [0,1] for q={}, R={r_cav_um} um",
                mode.q
            )));
        }
        let next = eq_length(mode.q, mode.n, mode.m, lambda_um, g);
        let done = (next - l).abs() <= FIXED_POINT_REL_TOL * next.abs();
        l = next;
        if done {
            let g = 1.0 - l / r_cav_um;
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::UnstableGeometry(format!("converged g = {g:.4} outside [0,1]")));
            }
            return Ok(l);
        }
    }
    Err(Error::NumericFailure(format!(
        "fixed point did not converge within {MAX_FIXED_POINT_ITERATIONS} iterations"
    )))
}

/// Residual of the defining equation at a candidate length (for verification).
pub fn length_residual(mode: ModeIndex, wavelength_nm: f64, r_cav_um: f64, l_eff_um: f64) -> f64 {
    let lambda_um = wavelength_nm * 1e-3;
    let g = if r_cav_um.is_infinite() { 1.0 } else { 1.0 - l_eff_um / r_cav_um };
    l_eff_um - eq_length(mode.q, mode.n, mode.m, lambda_um, g)
}

/// Geometry record for a converged mode.
pub fn geometry(mode: ModeIndex, wavelength_nm: f64, r_cav_um: f64) -> Result<GaussianGeometry> {
    let l = effective_length(mode, wavelength_nm, r_cav_um)?;
    Ok(GaussianGeometry {
        r_cav_um,
        l_eff_um: l,
        wavelength_nm,
        g: if r_cav_um.is_infinite() { 1.0 } else { 1.0 - l / r_cav_um },
    })
}

/// One resonance position of the dispersion ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    /// Position relative to the start of the scanned length range, nm.
    pub delta_l_nm: f64,
    pub l_eff_um: f64,
    pub mode: ModeIndex,
}

/// All modes of `modes` whose effective length falls inside
/// `[l_lo_um, l_hi_um]` at the probe wavelength, sorted by position.
/// Unstable modes (beyond the stability range) are skipped.
pub fn mode_dispersion_map(
    wavelength_nm: f64,
    r_cav_um: f64,
    l_lo_um: f64,
    l_hi_um: f64,
    modes: &[ModeIndex],
) -> Result<Vec<DispersionPoint>> {
    if !(l_hi_um > l_lo_um) || !(l_lo_um >= 0.0) {
        return Err(Error::invalid("length range must be positive and increasing"));
    }
    let mut points = Vec::new();
    for &mode in modes {
        match effective_length(mode, wavelength_nm, r_cav_um) {
            Ok(l) if l >= l_lo_um && l <= l_hi_um => points.push(DispersionPoint {
                delta_l_nm: (l - l_lo_um) * 1e3,
                l_eff_um: l,
                mode,
            }),
            Ok(_) => {}
            Err(Error::UnstableGeometry(_)) => {}
            Err(e) => return Err(e),
        }
    }
    points.sort_by(|a, b| a.l_eff_um.total_cmp(&b.l_eff_um));
    Ok(points)
}

/// All (q, n, m) with q in `q_range` and n+m up to `max_transverse`.
pub fn mode_set(
    q_range: std::ops::RangeInclusive<u32>,
    max_transverse: u32,
) -> Vec<ModeIndex> {
    let mut out = Vec::new();
    for q in q_range {
        for n in 0..=max_transverse {
            for m in 0..=(max_transverse - n) {
                out.push(ModeIndex { q, n, m });
            }
        }
    }
    out
}

/// Recover the mirror radius of curvature from observed mode positions by
/// least squares over the stated search range.
pub fn fit_mirror_curvature(
    wavelength_nm: f64,
    observed: &[(ModeIndex, f64)],
    r_lo_um: f64,
    r_hi_um: f64,
) -> Result<f64> {
    if observed.is_empty() {
        return Err(Error::invalid("no observed mode positions"));
    }
    if !(r_hi_um > r_lo_um && r_lo_um > 0.0) {
        return Err(Error::invalid("radius search range must be positive and increasing"));
    }
    let mut cost = |r: f64| -> f64 {
        observed
            .iter()
            .map(|(mode, l_obs)| match effective_length(*mode, wavelength_nm, r) {
                Ok(l) => (l - l_obs) * (l - l_obs),
                Err(_) => 1e9,
            })
            .sum()
    };
    Ok(golden_section_min(&mut cost, r_lo_um, r_hi_um, 1e-5))
}

/// Field and intensity beam waists at the flat mirror (`w0`) and at the
/// curved mirror (`w_mirror`), micrometers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamWaists {
    pub w0_field_um: f64,
    pub w_mirror_field_um: f64,
    pub w0_intensity_um: f64,
    pub w_mirror_intensity_um: f64,
}

impl BeamWaists {
    /// Average of the intensity waists at the two ends, the representative
    /// transverse size used by the field quantization.
    pub fn representative_intensity_um(&self) -> f64 {
        0.5 * (self.w0_intensity_um + self.w_mirror_intensity_um)
    }
}

/// Gaussian-beam waists of a stable plano-concave geometry.
pub fn beam_waists(l_eff_um: f64, r_cav_um: f64, wavelength_nm: f64) -> Result<BeamWaists> {
    if !(l_eff_um > 0.0) || !(r_cav_um > 0.0) || l_eff_um >= r_cav_um {
        return Err(Error::UnstableGeometry(format!(
            "need 0 < L ({l_eff_um} um) < R ({r_cav_um} um)"
        )));
    }
    let lambda_um = wavelength_nm * 1e-3;
    let z_r = (l_eff_um * (r_cav_um - l_eff_um)).sqrt();
    let w0 = (lambda_um * z_r / std::f64::consts::PI).sqrt();
    let w_mirror = w0 * (1.0 + (l_eff_um / z_r).powi(2)).sqrt();
    let s = std::f64::consts::SQRT_2;
    Ok(BeamWaists {
        w0_field_um: w0,
        w_mirror_field_um: w_mirror,
        w0_intensity_um: w0 / s,
        w_mirror_intensity_um: w_mirror / s,
    })
}

// ---------------------------------------------------------------------------
// Hermite-Gaussian mode images
// ---------------------------------------------------------------------------

/// Square intensity image of a transverse mode, normalized to unit peak.
#[derive(Debug, Clone)]
pub struct ModeImage {
    pub size_px: usize,
    /// Row-major pixels, `size_px * size_px` values in the unit interval.
    pub pixels: Vec<f64>,
    pub pitch_um_per_px: f64,
    /// Intensity waist used to synthesize the image, um.
    pub w_intensity_um: f64,
    pub n: u32,
    pub m: u32,
}

impl ModeImage {
    pub fn pixel(&self, ix: usize, iy: usize) -> f64 {
        self.pixels[iy * self.size_px + ix]
    }

    /// Coordinate of pixel center `i` relative to the image center, um.
    pub fn coordinate_um(&self, i: usize) -> f64 {
        (i as f64 - (self.size_px as f64 - 1.0) / 2.0) * self.pitch_um_per_px
    }

    /// Portable graymap (P2) rendering with 16-bit depth.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n65535\n", self.size_px, self.size_px);
        for iy in 0..self.size_px {
            let row: Vec<String> = (0..self.size_px)
                .map(|ix| format!("{}", (self.pixel(ix, iy).clamp(0.0, 1.0) * 65535.0).round() as u32))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Sidecar metadata record accompanying the graymap.
    pub fn metadata(&self) -> String {
        format!(
            "mode_n {}\nmode_m {}\npitch_um_per_px {}\nw_intensity_um {}\nsize_px {}\n",
            self.n, self.m, self.pitch_um_per_px, self.w_intensity_um, self.size_px
        )
    }
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(order: u32, x: f64) -> f64 {
    match order {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let mut h_prev = 1.0;
            let mut h = 2.0 * x;
            for k in 1..order {
                let next = 2.0 * x * h - 2.0 * k as f64 * h_prev;
                h_prev = h;
                h = next;
            }
            h
        }
    }
}

/// Synthesize the intensity image of transverse mode (n,m):
/// `I(x,y) ~ [H_n(sqrt2 x/w) H_m(sqrt2 y/w)]^2 exp(-2(x^2+y^2)/w^2)` with
/// `w` the field waist (`w_I * sqrt2`), normalized to unit peak.
pub fn hermite_gaussian_image(
    n: u32,
    m: u32,
    w_intensity_um: f64,
    pitch_um_per_px: f64,
    size_px: usize,
) -> Result<ModeImage> {
    if !(w_intensity_um > 0.0) || !(pitch_um_per_px > 0.0) {
        return Err(Error::invalid("waist and pitch must be > 0"));
    }
    if size_px < 16 {
        return Err(Error::invalid(format!("image size must be >= 16 px, got {size_px}")));
    }
    let w_field = w_intensity_um * std::f64::consts::SQRT_2;
    let mut pixels = vec![0.0; size_px * size_px];
    let center = (size_px as f64 - 1.0) / 2.0;
    let mut peak: f64 = 0.0;
    for iy in 0..size_px {
        let y = (iy as f64 - center) * pitch_um_per_px;
        for ix in 0..size_px {
            let x = (ix as f64 - center) * pitch_um_per_px;
            let hx = hermite(n, std::f64::consts::SQRT_2 * x / w_field);
            let hy = hermite(m, std::f64::consts::SQRT_2 * y / w_field);
            let v = (hx * hy) * (hx * hy) * (-2.0 * (x * x + y * y) / (w_field * w_field)).exp();
            pixels[iy * size_px + ix] = v;
            peak = peak.max(v);
        }
    }
    if peak > 0.0 {
        for p in pixels.iter_mut() {
            *p /= peak;
        }
    }
    Ok(ModeImage { size_px, pixels, pitch_um_per_px, w_intensity_um, n, m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Fit a Gaussian to the central linecut of a fundamental-like image and
/// return the 1/e intensity radius in micrometers.
pub fn fit_linecut_waist(image: &ModeImage, axis: Axis) -> Result<f64> {
    let size = image.size_px;
    let mid = size / 2;
    let (coords, values): (Vec<f64>, Vec<f64>) = match axis {
        Axis::X => (
            (0..size).map(|i| image.coordinate_um(i)).collect(),
            (0..size).map(|i| image.pixel(i, mid)).collect(),
        ),
        Axis::Y => (
            (0..size).map(|i| image.coordinate_um(i)).collect(),
            (0..size).map(|i| image.pixel(mid, i)).collect(),
        ),
    };
    let peak = values.iter().cloned().fold(f64::MIN, f64::max);
    let floor = values.iter().cloned().fold(f64::MAX, f64::min);
    if peak - floor < 1e-12 {
        return Err(Error::NumericFailure("flat linecut; nothing to fit".into()));
    }
    let ipeak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(mid);
    // width guess from the 1/e crossing
    let target = floor + (peak - floor) / std::f64::consts::E;
    let mut guess = image.pitch_um_per_px * 3.0;
    for i in ipeak..size {
        if values[i] <= target {
            guess = (coords[i] - coords[ipeak]).abs().max(image.pitch_um_per_px);
            break;
        }
    }
    let c = coords.clone();
    let v = values.clone();
    let mut residuals = move |p: &[f64]| -> Vec<f64> {
        c.iter()
            .zip(&v)
            .map(|(x, y)| p[2] * (-((x - p[0]) * (x - p[0])) / (p[1] * p[1])).exp() + p[3] - y)
            .collect()
    };
    let span = coords[size - 1] - coords[0];
    let fit = crate::optim::fit_least_squares(
        &mut residuals,
        &[coords[ipeak], guess, peak - floor, floor],
        &[coords[0], image.pitch_um_per_px * 0.1, 0.0, f64::NEG_INFINITY],
        &[coords[size - 1], span, f64::INFINITY, f64::INFINITY],
        &crate::optim::LeastSquaresOptions::default(),
    )?;
    if !fit.converged {
        return Err(Error::NumericFailure("linecut fit did not converge".into()));
    }
    Ok(fit.params[1].abs())
}
