//! Nonlinear least-squares analysis of measured spectra: Lorentzian and
//! Lorentzian-product lineshapes, finesse from cavity-length scans,
//! integrated-signal enhancement and power-linearity checks.
//!
//! All fits run on the shared damped least-squares machinery with numeric
//! Jacobians, initial guesses taken from the peak location and half-maximum
//! crossings, and a 500-iteration budget. The background model is a constant
//! offset per fit window.

use crate::error::{Error, Result};
use crate::optim::{fit_least_squares, LeastSquaresOptions};

/// Wavelength-sampled intensity data from a spectrometer (or synthesized).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSpectrum {
    /// Strictly increasing wavelengths, nm.
    pub wavelengths_nm: Vec<f64>,
    /// Non-negative intensities.
    pub counts: Vec<f64>,
    /// Acquisition time, s. Used by [`enhancement_ratio`] to normalize.
    pub integration_time_s: Option<f64>,
    /// Pump power, mW. Used by [`enhancement_ratio`] to normalize.
    pub power_mw: Option<f64>,
    pub label: String,
}

impl MeasuredSpectrum {
    pub fn new(
        wavelengths_nm: Vec<f64>,
        counts: Vec<f64>,
        integration_time_s: Option<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if wavelengths_nm.len() != counts.len() {
            return Err(Error::invalid("wavelength and count arrays differ in length"));
        }
        for w in wavelengths_nm.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("wavelengths must be strictly increasing"));
            }
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid("counts must be finite and non-negative"));
        }
        Ok(MeasuredSpectrum {
            wavelengths_nm,
            counts,
            integration_time_s,
            power_mw: None,
            label: label.into(),
        })
    }

    pub fn with_power_mw(mut self, power_mw: f64) -> Self {
        self.power_mw = Some(power_mw);
        self
    }

    /// Trapezoidal integral of counts over wavelength.
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.wavelengths_nm.len() {
            let dl = self.wavelengths_nm[i] - self.wavelengths_nm[i - 1];
            acc += 0.5 * (self.counts[i] + self.counts[i - 1]) * dl;
        }
        acc
    }

    /// Parse the two-column delimited format. Lines starting with '#' carry
    /// metadata (`integration_time_s`, `power_mW`, `label`).
    pub fn parse_delimited(text: &str) -> Result<Self> {
        let mut wavelengths = Vec::new();
        let mut counts = Vec::new();
        let mut integration_time_s = None;
        let mut power_mw = None;
        let mut label = String::from("spectrum");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim().replace([':', '='], " ");
                let mut parts = meta.split_whitespace();
                match (parts.next(), parts.next()) {
                    (Some("integration_time_s"), Some(v)) => {
                        integration_time_s = v.parse::<f64>().ok();
                    }
                    (Some("power_mW"), Some(v)) => power_mw = v.parse::<f64>().ok(),
                    (Some("label"), Some(v)) => label = v.to_string(),
                    _ => {}
                }
                continue;
            }
            let mut cols = line.split_whitespace();
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::InputFormat(format!("line {}: expected two columns", lineno + 1)));
            };
            // skip a leading header line of column names
            if wavelengths.is_empty() && a.parse::<f64>().is_err() {
                continue;
            }
            let lam: f64 = a
                .parse()
                .map_err(|_| Error::InputFormat(format!("line {}: bad wavelength '{a}'", lineno + 1)))?;
            let c: f64 = b
                .parse()
                .map_err(|_| Error::InputFormat(format!("line {}: bad count '{b}'", lineno + 1)))?;
            wavelengths.push(lam);
            counts.push(c);
        }
        let mut spectrum = MeasuredSpectrum::new(wavelengths, counts, integration_time_s, label)?;
        spectrum.power_mw = power_mw;
        Ok(spectrum)
    }

    pub fn to_delimited(&self) -> String {
        let mut out = String::new();
        if let Some(t) = self.integration_time_s {
            out.push_str(&format!("# integration_time_s {t}\n"));
        }
        if let Some(p) = self.power_mw {
            out.push_str(&format!("# power_mW {p}\n"));
        }
        out.push_str(&format!("# label {}\n", self.label));
        out.push_str("wavelength_nm\tcounts\n");
        for (l, c) in self.wavelengths_nm.iter().zip(&self.counts) {
            out.push_str(&format!("{l:.6}\t{c:.6}\n"));
        }
        out
    }
}

/// Unit-peak Lorentzian with FWHM `fwhm` centered at `center`.
pub fn lorentzian(x: f64, center: f64, fwhm: f64) -> f64 {
    let hw = 0.5 * fwhm;
    hw * hw / ((x - center) * (x - center) + hw * hw)
}

const MIN_FIT_POINTS: usize = 8;

/// Result of a single-Lorentzian fit.
#[derive(Debug, Clone)]
pub struct LorentzianFit {
    pub center_nm: f64,
    pub fwhm_pm: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// RMS residual of the converged fit.
    pub residual_rms: f64,
    /// Linearized one-sigma uncertainties (center, fwhm, amplitude, offset).
    pub stderr: [f64; 4],
}

fn peak_guess(spectrum: &MeasuredSpectrum) -> Result<(f64, f64, f64, f64)> {
    let lam = &spectrum.wavelengths_nm;
    let y = &spectrum.counts;
    if lam.len() < MIN_FIT_POINTS {
        return Err(Error::invalid(format!("need at least {MIN_FIT_POINTS} points")));
    }
    let (imax, ymax) =
        y.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let ymin = y.iter().cloned().fold(f64::MAX, f64::min);
    let amplitude = ymax - ymin;
    let span = lam[lam.len() - 1] - lam[0];
    if amplitude <= 0.0 || amplitude < 1e-12 * ymax.abs().max(1.0) {
        return Err(Error::NumericFailure("no resolved peak in the fit window".into()));
    }
    let half = ymin + 0.5 * amplitude;
    let mut lo = None;
    for i in (0..imax).rev() {
        if y[i] <= half {
            let f = (half - y[i]) / (y[i + 1] - y[i]);
            lo = Some(lam[i] + f * (lam[i + 1] - lam[i]));
            break;
        }
    }
    let mut hi = None;
    for i in imax..lam.len() - 1 {
        if y[i + 1] <= half {
            let f = (y[i] - half) / (y[i] - y[i + 1]);
            hi = Some(lam[i] + f * (lam[i + 1] - lam[i]));
            break;
        }
    }
    let fwhm = match (lo, hi) {
        (Some(a), Some(b)) => b - a,
        (Some(a), None) => 2.0 * (lam[imax] - a),
        (None, Some(b)) => 2.0 * (b - lam[imax]),
        (None, None) => {
            return Err(Error::NumericFailure(
                "no half-maximum crossings; peak unresolved".into(),
            ))
        }
    };
    let fwhm = fwhm.max(span * 1e-6);
    Ok((lam[imax], fwhm, amplitude, ymin))
}

/// Wavelengths of the `count` most prominent interior local maxima.
fn local_maxima(lam: &[f64], y: &[f64], count: usize) -> Vec<f64> {
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            peaks.push((y[i], lam[i]));
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    peaks.into_iter().take(count).map(|(_, l)| l).collect()
}

fn linearized_stderr(
    residuals: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    params: &[f64],
    cost: f64,
) -> Vec<f64> {
    let n = params.len();
    let r0 = residuals(params);
    let m = r0.len();
    if m <= n {
        return vec![f64::NAN; n];
    }
    let mut jac = nalgebra::DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        let h = 1e-6 * params[j].abs().max(1e-9);
        let mut p = params.to_vec();
        p[j] += h;
        let rp = residuals(&p);
        for i in 0..m {
            jac[(i, j)] = (rp[i] - r0[i]) / h;
        }
    }
    let jtj = jac.transpose() * &jac;
    let s2 = cost / (m - n) as f64;
    match jtj.try_inverse() {
        Some(inv) => (0..n).map(|j| (s2 * inv[(j, j)]).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; n],
    }
}

/// Fit `amplitude * L(lambda; center, fwhm) + offset` to a single-peaked
/// spectrum. Degenerate (flat or unpeaked) input is an error, not a fit.
pub fn fit_lorentzian(spectrum: &MeasuredSpectrum) -> Result<LorentzianFit> {
    let (c0, w0, a0, o0) = peak_guess(spectrum)?;
    let lam = spectrum.wavelengths_nm.clone();
    let y = spectrum.counts.clone();
    let mut res = move |p: &[f64]| -> Vec<f64> {
        lam.iter()
            .zip(&y)
            .map(|(l, yy)| p[2] * lorentzian(*l, p[0], p[1].abs()) + p[3] - yy)
            .collect()
    };
    let span = spectrum.wavelengths_nm[spectrum.wavelengths_nm.len() - 1]
        - spectrum.wavelengths_nm[0];
    let lo = [spectrum.wavelengths_nm[0], span * 1e-7, 0.0, f64::NEG_INFINITY];
    let hi = [
        spectrum.wavelengths_nm[spectrum.wavelengths_nm.len() - 1],
        span * 10.0,
        f64::INFINITY,
        f64::INFINITY,
    ];
    let opts = LeastSquaresOptions { max_iterations: 500, ..Default::default() };
    let fit = fit_least_squares(&mut res, &[c0, w0, a0, o0], &lo, &hi, &opts)?;
    if !fit.converged {
        return Err(Error::NumericFailure(format!(
            "lorentzian fit did not converge (best cost {:.3e} after {} iterations)",
            fit.cost, fit.iterations
        )));
    }
    let stderr = linearized_stderr(&mut res, &fit.params, fit.cost);
    Ok(LorentzianFit {
        center_nm: fit.params[0],
        fwhm_pm: fit.params[1].abs() * 1e3,
        amplitude: fit.params[2],
        offset: fit.params[3],
        residual_rms: (fit.cost / spectrum.counts.len() as f64).sqrt(),
        stderr: [stderr[0], stderr[1] * 1e3, stderr[2], stderr[3]],
    })
}

/// Result of a cavity-times-Stokes Lorentzian-product fit. The Stokes part is
/// held fixed; only the cavity part, amplitude and offset are free.
#[derive(Debug, Clone)]
pub struct ProductFit {
    pub cavity_center_nm: f64,
    pub cavity_fwhm_pm: f64,
    /// Fixed Stokes line center, copied from the input.
    pub stokes_center_nm: f64,
    /// Fixed Stokes FWHM, copied from the input.
    pub stokes_fwhm_pm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub residual_rms: f64,
    /// Cavity quality factor `cavity_center / cavity_fwhm`.
    pub cavity_q: f64,
}

/// Fit `amplitude * L_c(lambda_c, dl_c) * L_s(lambda_s, dl_s) + offset` with
/// the Stokes parameters frozen at the supplied values.
pub fn fit_lorentzian_product(
    spectrum: &MeasuredSpectrum,
    stokes_center_nm: f64,
    stokes_fwhm_pm: f64,
) -> Result<ProductFit> {
    if !(stokes_fwhm_pm > 0.0) {
        return Err(Error::invalid("stokes FWHM must be > 0"));
    }
    let (c0, w0, a0, o0) = peak_guess(spectrum)?;
    let stokes_fwhm_nm = stokes_fwhm_pm * 1e-3;
    let lam = spectrum.wavelengths_nm.clone();
    let y = spectrum.counts.clone();
    let mut res = move |p: &[f64]| -> Vec<f64> {
        lam.iter()
            .zip(&y)
            .map(|(l, yy)| {
                p[2] * lorentzian(*l, p[0], p[1].abs())
                    * lorentzian(*l, stokes_center_nm, stokes_fwhm_nm)
                    + p[3]
                    - yy
            })
            .collect()
    };
    let span = spectrum.wavelengths_nm[spectrum.wavelengths_nm.len() - 1]
        - spectrum.wavelengths_nm[0];
    let lo = [spectrum.wavelengths_nm[0] - span, span * 1e-7, 0.0, f64::NEG_INFINITY];
    let hi = [
        spectrum.wavelengths_nm[spectrum.wavelengths_nm.len() - 1] + span,
        span * 10.0,
        f64::INFINITY,
        f64::INFINITY,
    ];
    let opts = LeastSquaresOptions { max_iterations: 500, ..Default::default() };
    // A detuned cavity produces a double-lobed product with one local
    // minimum per lobe, so start the fit from every local maximum of the
    // data and keep the best outcome. The Stokes factor suppresses the
    // apparent cavity amplitude; rescale the seed accordingly.
    let mut seeds: Vec<(f64, f64)> = local_maxima(&spectrum.wavelengths_nm, &spectrum.counts, 4)
        .into_iter()
        .map(|c| (c, w0))
        .collect();
    if seeds.is_empty() {
        seeds.push((c0, w0));
    }
    let mut best: Option<crate::optim::LeastSquaresFit> = None;
    for (c_seed, w_seed) in seeds {
        let stokes_at_seed = lorentzian(c_seed, stokes_center_nm, stokes_fwhm_nm).max(1e-6);
        let fit = fit_least_squares(
            &mut res,
            &[c_seed, w_seed, a0 / stokes_at_seed, o0],
            &lo,
            &hi,
            &opts,
        )?;
        if fit.converged && best.as_ref().map(|b| fit.cost < b.cost).unwrap_or(true) {
            best = Some(fit);
        }
    }
    let fit = best
        .ok_or_else(|| Error::NumericFailure("lorentzian-product fit did not converge".into()))?;
    let cavity_center_nm = fit.params[0];
    let cavity_fwhm_pm = fit.params[1].abs() * 1e3;
    Ok(ProductFit {
        cavity_center_nm,
        cavity_fwhm_pm,
        stokes_center_nm,
        stokes_fwhm_pm,
        amplitude: fit.params[2],
        offset: fit.params[3],
        residual_rms: (fit.cost / spectrum.counts.len() as f64).sqrt(),
        cavity_q: cavity_center_nm / (cavity_fwhm_pm * 1e-3),
    })
}

/// Finesse extracted from a fundamental-mode intensity trace versus air gap.
#[derive(Debug, Clone)]
pub struct FinesseResult {
    pub finesse: f64,
    /// Lorentzian FWHM of the resonance in air-gap units, nm.
    pub gap_fwhm_nm: f64,
    pub gap_center_nm: f64,
}

/// Fit a Lorentzian to intensity versus air gap and convert its width to a
/// finesse via `F = (lambda/2) / FWHM_gap`.
pub fn finesse_from_length_scan(
    gaps_nm: &[f64],
    intensity: &[f64],
    wavelength_nm: f64,
) -> Result<FinesseResult> {
    if !(wavelength_nm > 0.0) {
        return Err(Error::invalid("wavelength must be > 0"));
    }
    let scan = MeasuredSpectrum::new(gaps_nm.to_vec(), intensity.to_vec(), None, "length-scan")?;
    let fit = fit_lorentzian(&scan)
        .map_err(|e| Error::NumericFailure(format!("unresolved resonance in length scan: {e}")))?;
    let gap_fwhm_nm = fit.fwhm_pm * 1e-3;
    Ok(FinesseResult {
        finesse: 0.5 * wavelength_nm / gap_fwhm_nm,
        gap_fwhm_nm,
        gap_center_nm: fit.center_nm,
    })
}

/// Mirror-limited design finesse from the two power reflectances.
pub fn design_finesse(r1: f64, r2: f64) -> Result<f64> {
    if !(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 < 1.0) {
        return Err(Error::invalid("reflectances must be in (0,1)"));
    }
    let g = (r1 * r2).sqrt();
    Ok(std::f64::consts::PI * g.sqrt() / (1.0 - g))
}

/// Ratio of wavelength-integrated signals, each normalized by its
/// integration time and pump power when present.
pub fn enhancement_ratio(on: &MeasuredSpectrum, off: &MeasuredSpectrum) -> Result<f64> {
    let norm = |s: &MeasuredSpectrum| {
        s.integral() / s.integration_time_s.unwrap_or(1.0) / s.power_mw.unwrap_or(1.0)
    };
    let denom = norm(off);
    if denom <= 0.0 {
        return Err(Error::NumericFailure("off-cavity integral is zero".into()));
    }
    Ok(norm(on) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearityVerdict {
    Linear,
    SuperLinear,
    SubLinear,
}

impl std::fmt::Display for LinearityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LinearityVerdict::Linear => write!(f, "linear"),
            LinearityVerdict::SuperLinear => write!(f, "super-linear"),
            LinearityVerdict::SubLinear => write!(f, "sub-linear"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PowerLinearity {
    /// Log-log slope of signal versus power.
    pub exponent: f64,
    /// Ordinary least-squares slope of signal versus power.
    pub slope: f64,
    pub verdict: LinearityVerdict,
}

/// Check whether an integrated signal grows linearly with pump power.
/// The verdict is `Linear` when the log-log exponent lies in [0.9, 1.1];
/// a larger exponent flags incipient super-linearity.
pub fn power_linearity(points: &[(f64, f64)]) -> Result<PowerLinearity> {
    if points.len() < 3 {
        return Err(Error::invalid("need at least 3 power points"));
    }
    if points.iter().any(|(p, s)| *p <= 0.0 || *s <= 0.0) {
        return Err(Error::invalid("powers and signals must be positive"));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (p, s) in points {
        let (x, y) = (p.ln(), s.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let (mut ux, mut uy, mut uxx, mut uxy) = (0.0, 0.0, 0.0, 0.0);
    for (p, s) in points {
        ux += p;
        uy += s;
        uxx += p * p;
        uxy += p * s;
    }
    let slope = (n * uxy - ux * uy) / (n * uxx - ux * ux);
    let verdict = if exponent > 1.1 {
        LinearityVerdict::SuperLinear
    } else if exponent < 0.9 {
        LinearityVerdict::SubLinear
    } else {
        LinearityVerdict::Linear
    };
    Ok(PowerLinearity { exponent, slope, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn synthetic_lorentzian(
        center: f64,
        fwhm_nm: f64,
        amplitude: f64,
        offset: f64,
        lam: &[f64],
    ) -> Vec<f64> {
        lam.iter().map(|l| amplitude * lorentzian(*l, center, fwhm_nm) + offset).collect()
    }

    #[test]
    fn noiseless_round_trip_recovers_parameters() {
        let lam = grid(572.3, 573.1, 321);
        let y = synthetic_lorentzian(572.67, 0.071, 1000.0, 40.0, &lam);
        let spec = MeasuredSpectrum::new(lam, y, None, "synthetic").unwrap();
        let fit = fit_lorentzian(&spec).unwrap();
        assert!((fit.center_nm - 572.67).abs() / 572.67 < 1e-3);
        assert!((fit.fwhm_pm - 71.0).abs() / 71.0 < 1e-3);
        assert!((fit.amplitude - 1000.0).abs() / 1000.0 < 1e-3);
        assert!((fit.offset - 40.0).abs() < 1.0);
        assert!(fit.residual_rms < 1e-6);
    }

    #[test]
    fn flat_spectrum_is_an_error_not_a_fit() {
        let lam = grid(570.0, 575.0, 64);
        let y = vec![100.0; 64];
        let spec = MeasuredSpectrum::new(lam, y, None, "flat").unwrap();
        assert!(fit_lorentzian(&spec).is_err());
    }

    #[test]
    fn noisy_monte_carlo_center_and_width() {
        // 5% additive noise, >= 100 seeds: center within 1 pm, FWHM within
        // 5% on average, and the width estimator unbiased within its spread
        let lam = grid(572.2, 573.15, 241);
        let clean = synthetic_lorentzian(572.67, 0.071, 1000.0, 100.0, &lam);
        let mut center_err = Vec::new();
        let mut width_rel = Vec::new();
        for seed in 0..120u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<f64> = clean
                .iter()
                .map(|v| (v + 50.0 * rng.gen_range(-1.0..1.0)).max(0.0))
                .collect();
            let spec = MeasuredSpectrum::new(lam.clone(), y, None, "mc").unwrap();
            let fit = fit_lorentzian(&spec).unwrap();
            center_err.push(fit.center_nm - 572.67);
            width_rel.push(fit.fwhm_pm / 71.0 - 1.0);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let mean_center = mean(&center_err).abs();
        let mean_width = mean(&width_rel).abs();
        assert!(mean_center < 1e-3, "mean center error {mean_center} nm");
        assert!(mean_width < 0.05, "mean relative width error {mean_width}");
    }

    #[test]
    fn product_fit_recovers_detuned_cavity() {
        let lam = grid(571.2, 573.4, 441);
        let (ls, dls) = (572.67, 0.071);
        let (lc, dlc) = (571.97, 0.080);
        let y: Vec<f64> = lam
            .iter()
            .map(|l| 800.0 * lorentzian(*l, lc, dlc) * lorentzian(*l, ls, dls) + 20.0)
            .collect();
        let spec = MeasuredSpectrum::new(lam, y, None, "product").unwrap();
        let fit = fit_lorentzian_product(&spec, ls, dls * 1e3).unwrap();
        assert_eq!(fit.stokes_center_nm, ls);
        assert_eq!(fit.stokes_fwhm_pm, 71.0);
        assert!((fit.cavity_center_nm - lc).abs() < 0.005, "{}", fit.cavity_center_nm);
        assert!((fit.cavity_fwhm_pm - 80.0).abs() / 80.0 < 0.10, "{}", fit.cavity_fwhm_pm);
    }

    #[test]
    fn product_fit_on_resonance_q() {
        let lam = grid(572.2, 573.15, 381);
        let (ls, dls) = (572.67, 0.071);
        let y: Vec<f64> = lam
            .iter()
            .map(|l| 500.0 * lorentzian(*l, ls, 0.070) * lorentzian(*l, ls, dls) + 5.0)
            .collect();
        let spec = MeasuredSpectrum::new(lam, y, None, "onres").unwrap();
        let fit = fit_lorentzian_product(&spec, ls, 71.0).unwrap();
        assert!((fit.cavity_q - 8200.0).abs() / 8200.0 < 0.10, "Q {}", fit.cavity_q);
    }

    #[test]
    fn detuning_endpoint_widths_map_to_reported_q() {
        for (lc, dlc_pm, q_expect) in [(572.0, 80.0, 7200.0), (573.4, 60.0, 9600.0)] {
            let lam = grid(lc - 1.2, lc + 1.2, 481);
            let y: Vec<f64> = lam
                .iter()
                .map(|l| {
                    600.0 * lorentzian(*l, lc, dlc_pm * 1e-3) * lorentzian(*l, 572.67, 0.071) + 10.0
                })
                .collect();
            let spec = MeasuredSpectrum::new(lam, y, None, "endpoint").unwrap();
            let fit = fit_lorentzian_product(&spec, 572.67, 71.0).unwrap();
            assert!(
                (fit.cavity_q - q_expect).abs() / q_expect < 0.10,
                "Q {} vs {}",
                fit.cavity_q,
                q_expect
            );
        }
    }

    #[test]
    fn finesse_from_synthetic_scan() {
        let lambda = 572.67;
        let fwhm = lambda / 2.0 / 350.0; // 0.818 nm
        let gaps = grid(2590.0, 2606.0, 321);
        let y: Vec<f64> =
            gaps.iter().map(|g| 900.0 * lorentzian(*g, 2598.0, fwhm) + 30.0).collect();
        let res = finesse_from_length_scan(&gaps, &y, lambda).unwrap();
        assert!((res.finesse - 350.0).abs() / 350.0 < 0.02, "finesse {}", res.finesse);
    }

    #[test]
    fn finesse_halves_when_width_doubles() {
        let lambda = 572.67;
        let gaps = grid(2590.0, 2606.0, 321);
        let mk = |fwhm: f64| {
            let y: Vec<f64> =
                gaps.iter().map(|g| 900.0 * lorentzian(*g, 2598.0, fwhm) + 30.0).collect();
            finesse_from_length_scan(&gaps, &y, lambda).unwrap().finesse
        };
        let f1 = mk(0.818);
        let f2 = mk(1.636);
        assert!((f1 / f2 - 2.0).abs() < 0.05);
    }

    #[test]
    fn design_finesse_sanity() {
        // symmetric mirrors with T = 3e-3 give F ~ pi/T
        let f = design_finesse(0.997, 0.997).unwrap();
        assert!((f - std::f64::consts::PI / 3e-3).abs() / f < 0.01);
        assert!(design_finesse(1.2, 0.9).is_err());
    }

    #[test]
    fn enhancement_ratio_identity_and_constructed() {
        let lam = grid(572.0, 573.4, 201);
        let y = synthetic_lorentzian(572.67, 0.071, 500.0, 0.0, &lam);
        let a = MeasuredSpectrum::new(lam.clone(), y.clone(), Some(1.0), "on").unwrap();
        let b = MeasuredSpectrum::new(lam.clone(), y.clone(), Some(1.0), "off").unwrap();
        assert!((enhancement_ratio(&a, &b).unwrap() - 1.0).abs() < 1e-12);

        // constructed ratio 10 with different integration times
        let y_off: Vec<f64> = y.iter().map(|v| v * 120.0 / 10.0).collect();
        let off = MeasuredSpectrum::new(lam, y_off, Some(120.0), "off").unwrap();
        let r = enhancement_ratio(&a, &off).unwrap();
        assert!((r - 10.0).abs() < 0.1, "ratio {r}");
    }

    #[test]
    fn enhancement_stand_ins_reproduce_the_measured_factor() {
        // cavity trace at 1 s against a confocal trace at 120 s, constructed
        // so the time-normalized integrals differ by exactly 58.8
        let lam = grid(572.0, 573.4, 281);
        let target = 58.8;
        let on_counts = synthetic_lorentzian(572.67, 0.070, 4.0e4, 0.0, &lam);
        let off_counts: Vec<f64> = synthetic_lorentzian(572.67, 0.071, 1.0, 0.0, &lam)
            .iter()
            .map(|v| v * 4.0e4 * (0.070 / 0.071) * 120.0 / target)
            .collect();
        let on = MeasuredSpectrum::new(lam.clone(), on_counts, Some(1.0), "cavity").unwrap();
        let off = MeasuredSpectrum::new(lam, off_counts, Some(120.0), "confocal").unwrap();
        let ratio = enhancement_ratio(&on, &off).unwrap();
        // the two lineshapes have slightly different widths, so the integral
        // ratio is not bit-exact against the construction
        assert!((ratio - target).abs() / target < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn enhancement_scales_inversely_with_on_cavity_time() {
        let lam = grid(572.0, 573.4, 101);
        let y = synthetic_lorentzian(572.67, 0.071, 500.0, 0.0, &lam);
        let off = MeasuredSpectrum::new(lam.clone(), y.clone(), Some(1.0), "off").unwrap();
        let on_1 = MeasuredSpectrum::new(lam.clone(), y.clone(), Some(1.0), "on").unwrap();
        let on_2 = MeasuredSpectrum::new(lam, y, Some(2.0), "on").unwrap();
        let r1 = enhancement_ratio(&on_1, &off).unwrap();
        let r2 = enhancement_ratio(&on_2, &off).unwrap();
        assert!((r1 / r2 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn power_linearity_exact_and_quadratic() {
        let linear: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, 3.5 * i as f64)).collect();
        let res = power_linearity(&linear).unwrap();
        assert!((res.exponent - 1.0).abs() < 1e-9);
        assert_eq!(res.verdict, LinearityVerdict::Linear);
        assert!((res.slope - 3.5).abs() < 1e-9);

        let quad: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, 2.0 * (i * i) as f64)).collect();
        let res = power_linearity(&quad).unwrap();
        assert!((res.exponent - 2.0).abs() < 1e-9);
        assert_eq!(res.verdict, LinearityVerdict::SuperLinear);
    }

    #[test]
    fn power_linearity_with_noise_stays_linear() {
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let pts: Vec<(f64, f64)> = (1..=8)
                .map(|i| {
                    let p = 2.5 * i as f64;
                    (p, 7.0 * p * (1.0 + 0.05 * rng.gen_range(-1.0..1.0)))
                })
                .collect();
            let res = power_linearity(&pts).unwrap();
            assert!(
                res.exponent > 0.9 && res.exponent < 1.1,
                "seed {seed}: exponent {}",
                res.exponent
            );
        }
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(power_linearity(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn delimited_round_trip() {
        let lam = grid(570.0, 575.0, 16);
        let y = synthetic_lorentzian(572.67, 0.2, 100.0, 5.0, &lam);
        let spec = MeasuredSpectrum::new(lam, y, Some(120.0), "demo")
            .unwrap()
            .with_power_mw(20.0);
        let text = spec.to_delimited();
        let back = MeasuredSpectrum::parse_delimited(&text).unwrap();
        assert_eq!(back.integration_time_s, Some(120.0));
        assert_eq!(back.power_mw, Some(20.0));
        assert_eq!(back.label, "demo");
        assert_eq!(back.wavelengths_nm.len(), spec.wavelengths_nm.len());
        for (a, b) in back.counts.iter().zip(&spec.counts) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
