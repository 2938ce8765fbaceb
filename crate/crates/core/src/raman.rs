//! Stokes-scattering kinematics and linewidth bookkeeping.
//!
//! Wavelength/shift arithmetic happens in wavenumbers, where the Stokes shift
//! is additive; linewidths interconvert between pm (at a reference
//! wavelength), GHz, and a quality factor via `dnu = c dl / l^2` and
//! `Q = l / dl`. Lorentzian linewidths add under convolution, which makes the
//! pump-linewidth deconvolution a subtraction.

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

/// A Raman shift in wavenumbers (1/cm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanShift {
    pub inv_cm: f64,
}

impl RamanShift {
    pub fn new(inv_cm: f64) -> Result<Self> {
        if !(inv_cm > 0.0) {
            return Err(Error::invalid(format!("Raman shift must be > 0, got {inv_cm}")));
        }
        Ok(RamanShift { inv_cm })
    }

    /// The measured first-order diamond shift used throughout.
    pub fn diamond() -> Self {
        RamanShift { inv_cm: crate::constants::DIAMOND_RAMAN_SHIFT_INV_CM }
    }

    /// Textbook diamond value, selectable where the measured one is not wanted.
    pub fn diamond_literature() -> Self {
        RamanShift { inv_cm: 1332.0 }
    }
}

/// Stokes wavelength for a pump wavelength and a (positive) Raman shift:
/// `1/lambda_s = 1/lambda_pump - shift`.
pub fn stokes_wavelength(pump_nm: f64, shift_inv_cm: f64) -> Result<f64> {
    if !(pump_nm > 0.0) {
        return Err(Error::invalid(format!("pump wavelength must be > 0, got {pump_nm}")));
    }
    if shift_inv_cm < 0.0 {
        return Err(Error::invalid(format!("shift must be >= 0, got {shift_inv_cm}")));
    }
    let pump_inv_cm = 1e7 / pump_nm;
    let stokes_inv_cm = pump_inv_cm - shift_inv_cm;
    if stokes_inv_cm <= 0.0 {
        return Err(Error::invalid(format!(
            "shift {shift_inv_cm}/cm exceeds the pump wavenumber {pump_inv_cm:.1}/cm"
        )));
    }
    Ok(1e7 / stokes_inv_cm)
}

/// Pump wavelength that produces a given Stokes wavelength (inverse of
/// [`stokes_wavelength`]).
pub fn pump_wavelength(stokes_nm: f64, shift_inv_cm: f64) -> Result<f64> {
    if !(stokes_nm > 0.0) {
        return Err(Error::invalid("stokes wavelength must be > 0"));
    }
    Ok(1e7 / (1e7 / stokes_nm + shift_inv_cm))
}

/// A spectral linewidth tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Linewidth {
    /// FWHM in pm at a reference wavelength in nm.
    PicometersAt { pm: f64, reference_nm: f64 },
    /// FWHM in GHz.
    Gigahertz(f64),
    /// Quality factor at a reference wavelength in nm.
    QualityAt { q: f64, reference_nm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinewidthUnit {
    Picometers,
    Gigahertz,
    Quality,
}

impl std::str::FromStr for LinewidthUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pm" => Ok(LinewidthUnit::Picometers),
            "ghz" => Ok(LinewidthUnit::Gigahertz),
            "q" => Ok(LinewidthUnit::Quality),
            other => Err(Error::invalid(format!("unknown linewidth unit '{other}'"))),
        }
    }
}

impl Linewidth {
    pub fn from_value(value: f64, unit: LinewidthUnit, reference_nm: Option<f64>) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::invalid(format!("linewidth must be > 0, got {value}")));
        }
        match unit {
            LinewidthUnit::Gigahertz => Ok(Linewidth::Gigahertz(value)),
            LinewidthUnit::Picometers => {
                let reference_nm = reference_nm
                    .ok_or_else(|| Error::invalid("pm linewidth needs a reference wavelength"))?;
                Ok(Linewidth::PicometersAt { pm: value, reference_nm })
            }
            LinewidthUnit::Quality => {
                let reference_nm = reference_nm
                    .ok_or_else(|| Error::invalid("Q needs a reference wavelength"))?;
                Ok(Linewidth::QualityAt { q: value, reference_nm })
            }
        }
    }

    /// FWHM in GHz; pm and Q conversions use their stored reference.
    pub fn to_ghz(self) -> f64 {
        match self {
            Linewidth::Gigahertz(g) => g,
            Linewidth::PicometersAt { pm, reference_nm } => {
                // dnu = c dl / l^2
                SPEED_OF_LIGHT * (pm * 1e-12) / (reference_nm * 1e-9).powi(2) / 1e9
            }
            Linewidth::QualityAt { q, reference_nm } => {
                let pm = reference_nm * 1e3 / q;
                Linewidth::PicometersAt { pm, reference_nm }.to_ghz()
            }
        }
    }

    /// FWHM in pm at the given reference wavelength.
    pub fn to_pm(self, reference_nm: f64) -> Result<f64> {
        if !(reference_nm > 0.0) {
            return Err(Error::invalid("reference wavelength must be > 0"));
        }
        let ghz = self.to_ghz();
        Ok(ghz * 1e9 * (reference_nm * 1e-9).powi(2) / SPEED_OF_LIGHT * 1e12)
    }

    /// Quality factor at the given reference wavelength.
    pub fn to_q(self, reference_nm: f64) -> Result<f64> {
        Ok(reference_nm * 1e3 / self.to_pm(reference_nm)?)
    }
}

/// Convert a linewidth value between units at a reference wavelength.
pub fn linewidth_convert(
    value: f64,
    from: LinewidthUnit,
    to: LinewidthUnit,
    reference_nm: Option<f64>,
) -> Result<f64> {
    let lw = Linewidth::from_value(value, from, reference_nm)?;
    match to {
        LinewidthUnit::Gigahertz => Ok(lw.to_ghz()),
        LinewidthUnit::Picometers => lw.to_pm(
            reference_nm.ok_or_else(|| Error::invalid("pm target needs a reference wavelength"))?,
        ),
        LinewidthUnit::Quality => lw.to_q(
            reference_nm.ok_or_else(|| Error::invalid("Q target needs a reference wavelength"))?,
        ),
    }
}

/// Width of the remaining Lorentzian after removing a Lorentzian component:
/// Lorentzian convolution adds FWHMs, so this is a plain subtraction.
pub fn deconvolve_lorentzian(total_ghz: f64, component_ghz: f64) -> Result<f64> {
    if component_ghz < 0.0 {
        return Err(Error::invalid("component width must be >= 0"));
    }
    if total_ghz <= component_ghz {
        return Err(Error::invalid(format!(
            "total width {total_ghz} GHz must exceed the component {component_ghz} GHz"
        )));
    }
    Ok(total_ghz - component_ghz)
}

/// Phonon lifetime from a Lorentzian Raman FWHM: `tau = 1 / (2 pi dnu)`.
pub fn phonon_lifetime_ps(fwhm_ghz: f64) -> Result<f64> {
    if !(fwhm_ghz > 0.0) {
        return Err(Error::invalid(format!("FWHM must be > 0, got {fwhm_ghz}")));
    }
    Ok(1e12 / (2.0 * std::f64::consts::PI * fwhm_ghz * 1e9))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_pump_gives_stokes_at_572_67() {
        let l = stokes_wavelength(532.0, 1335.0).unwrap();
        assert!((l - 572.67).abs() < 0.05, "{l}");
    }

    #[test]
    fn red_pump_gives_stokes_near_695() {
        let l = stokes_wavelength(636.0, 1335.0).unwrap();
        assert!((l - 695.0).abs() < 0.1, "{l}");
    }

    #[test]
    fn zero_shift_is_identity() {
        let l = stokes_wavelength(532.0, 0.0).unwrap();
        assert!((l - 532.0).abs() < 1e-12);
    }

    #[test]
    fn shift_round_trip_is_exact() {
        for pump in [488.0, 532.0, 636.0] {
            let s = stokes_wavelength(pump, 1335.0).unwrap();
            let back = pump_wavelength(s, 1335.0).unwrap();
            assert!((back - pump).abs() / pump < 1e-12);
        }
    }

    #[test]
    fn precondition_violation_is_error() {
        assert!(stokes_wavelength(532.0, 20000.0).is_err());
        assert!(stokes_wavelength(-1.0, 1335.0).is_err());
    }

    #[test]
    fn pm_to_ghz_examples() {
        let stokes_636 = stokes_wavelength(636.0, 1335.0).unwrap();
        let g = linewidth_convert(
            77.0,
            LinewidthUnit::Picometers,
            LinewidthUnit::Gigahertz,
            Some(stokes_636),
        )
        .unwrap();
        assert!((g - 47.8).abs() < 0.3, "{g}");

        let g = linewidth_convert(
            71.0,
            LinewidthUnit::Picometers,
            LinewidthUnit::Gigahertz,
            Some(572.67),
        )
        .unwrap();
        assert!((g - 64.9).abs() < 0.3, "{g}");
    }

    #[test]
    fn pm_to_q_example() {
        let q = linewidth_convert(
            70.0,
            LinewidthUnit::Picometers,
            LinewidthUnit::Quality,
            Some(572.67),
        )
        .unwrap();
        assert!((q - 8200.0).abs() < 100.0, "{q}");
    }

    #[test]
    fn conversions_round_trip() {
        for reference in [532.0, 572.67, 695.0] {
            for pm in [10.0, 71.0, 400.0] {
                let ghz = linewidth_convert(
                    pm,
                    LinewidthUnit::Picometers,
                    LinewidthUnit::Gigahertz,
                    Some(reference),
                )
                .unwrap();
                let back = linewidth_convert(
                    ghz,
                    LinewidthUnit::Gigahertz,
                    LinewidthUnit::Picometers,
                    Some(reference),
                )
                .unwrap();
                assert!((back - pm).abs() / pm < 1e-12);
            }
        }
    }

    #[test]
    fn missing_reference_is_error() {
        assert!(linewidth_convert(
            77.0,
            LinewidthUnit::Picometers,
            LinewidthUnit::Gigahertz,
            None
        )
        .is_err());
    }

    #[test]
    fn deconvolution_examples() {
        let d = deconvolve_lorentzian(64.9, 15.0).unwrap();
        assert!((d - 49.9).abs() < 1e-9);
        assert!((deconvolve_lorentzian(42.0, 0.0).unwrap() - 42.0).abs() < 1e-12);
        assert!(deconvolve_lorentzian(10.0, 12.0).is_err());
    }

    #[test]
    fn phonon_lifetimes() {
        assert!((phonon_lifetime_ps(44.2).unwrap() - 3.6).abs() < 0.05);
        assert!((phonon_lifetime_ps(40.8).unwrap() - 3.9).abs() < 0.05);
        assert!((phonon_lifetime_ps(47.8).unwrap() - 3.3).abs() < 0.05);
    }

    #[test]
    fn lifetime_linewidth_product_is_inverse_two_pi() {
        for ghz in [10.0, 44.2, 113.0] {
            let tau_s = phonon_lifetime_ps(ghz).unwrap() * 1e-12;
            let prod = tau_s * ghz * 1e9;
            assert!((prod - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        }
    }
}
