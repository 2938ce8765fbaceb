//! Physical normalization of the cavity field, effective mode volume,
//! Purcell factor, coupling efficiencies and the cavity-to-confocal
//! enhancement budget.
//!
//! The vacuum field is fixed by the normalization
//!
//! ```text
//! 2 pi (w_I^2/4) Int eps0 n^2(z) |E_vac(z)|^2 dz = hbar omega / 2
//! ```
//!
//! with a constant intensity waist `w_I` along the axis. The effective mode
//! volume follows as `V_eff = (hbar omega/2) / (eps0 n_host^2 |E_max|^2)`
//! with `E_max` the in-membrane maximum, which is the definition consistent
//! with quoting the field maximum and the volume as one pair.

use crate::constants::{angular_frequency, EPSILON_0, HBAR};
use crate::error::{Error, Result};
use crate::stack::CavityAssembly;
use crate::tmm::{transmittance, FieldProfile};

/// A field profile rescaled to physical vacuum-fluctuation units.
#[derive(Debug, Clone)]
pub struct QuantizedField {
    /// Profile with amplitudes in V/m.
    pub profile: FieldProfile,
    /// Intensity waist used in the transverse factor, um.
    pub w_intensity_um: f64,
    /// Photon energy hbar*omega, J.
    pub photon_energy_j: f64,
}

impl QuantizedField {
    /// Maximum |E_vac| within layers of the named material, V/m, with its
    /// position along the stack in nm.
    pub fn max_e_in_material(&self, material_name: &str) -> (f64, f64) {
        self.profile.max_abs_e_in_material(material_name)
    }

    /// Left side of the normalization identity divided by hbar*omega/2;
    /// equals 1 for a correctly normalized field.
    pub fn normalization_ratio(&self) -> f64 {
        let transverse_m2 =
            2.0 * std::f64::consts::PI * 0.25 * (self.w_intensity_um * 1e-6).powi(2);
        let integral = EPSILON_0 * self.profile.energy_integral_si();
        transverse_m2 * integral / (0.5 * self.photon_energy_j)
    }
}

/// Rescale a raw standing-wave profile so the printed normalization holds.
/// The result is independent of the input amplitude scale.
pub fn quantize_field(
    profile: &FieldProfile,
    w_intensity_um: f64,
    wavelength_nm: f64,
) -> Result<QuantizedField> {
    if !(w_intensity_um > 0.0) {
        return Err(Error::invalid("intensity waist must be > 0"));
    }
    if !(wavelength_nm > 0.0) {
        return Err(Error::invalid("wavelength must be > 0"));
    }
    let integral = profile.energy_integral_si();
    if !(integral > 0.0) {
        return Err(Error::invalid("zero-field profile cannot be normalized"));
    }
    let omega = angular_frequency(wavelength_nm);
    let photon_energy_j = HBAR * omega;
    let transverse_m2 = 2.0 * std::f64::consts::PI * 0.25 * (w_intensity_um * 1e-6).powi(2);
    let scale = (0.5 * photon_energy_j / (transverse_m2 * EPSILON_0 * integral)).sqrt();
    Ok(QuantizedField { profile: profile.scaled(scale), w_intensity_um, photon_energy_j })
}

/// Effective mode volume in both unit systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeVolume {
    pub lambda_over_n_cubed: f64,
    pub cubic_um: f64,
    /// The field maximum the volume was derived from, V/m.
    pub e_max_v_per_m: f64,
}

/// `V_eff = (hbar omega/2) / (eps0 n_host^2 |E_max|^2)` with `E_max` taken
/// inside the named host material.
pub fn mode_volume(
    field: &QuantizedField,
    n_host: f64,
    host_material_name: &str,
) -> Result<ModeVolume> {
    if !(n_host >= 1.0) {
        return Err(Error::invalid("host index must be >= 1"));
    }
    let (e_max, _) = field.max_e_in_material(host_material_name);
    if !(e_max > 0.0) {
        return Err(Error::invalid(format!(
            "no field maximum found in material '{host_material_name}'"
        )));
    }
    let v_m3 = 0.5 * field.photon_energy_j / (EPSILON_0 * n_host * n_host * e_max * e_max);
    let lambda_over_n_m = field.profile.wavelength_nm * 1e-9 / n_host;
    Ok(ModeVolume {
        lambda_over_n_cubed: v_m3 / lambda_over_n_m.powi(3),
        cubic_um: v_m3 * 1e18,
        e_max_v_per_m: e_max,
    })
}

/// Default averaging of the enhancement over the field profile in the host.
pub const DEFAULT_AVERAGING: f64 = 0.5;

/// `F_P = 1 + 3/(4 pi^2) (Q/V) averaging` with V in (lambda/n)^3 units.
pub fn purcell_factor(q: f64, v_eff_lambda_over_n_cubed: f64, averaging: f64) -> Result<f64> {
    if !(q >= 0.0) || !(v_eff_lambda_over_n_cubed > 0.0) {
        return Err(Error::invalid("Q must be >= 0 and V > 0"));
    }
    if !(averaging > 0.0 && averaging <= 1.0) {
        return Err(Error::invalid(format!("averaging must be in (0,1], got {averaging}")));
    }
    Ok(1.0
        + 3.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI)
            * (q / v_eff_lambda_over_n_cubed)
            * averaging)
}

/// Collection efficiency of the confocal reference measurement:
/// `eta_o = 1 - sqrt(1 - (NA/n_host)^2)`, the objective solid angle doubled
/// by the bottom-mirror reflection.
pub fn eta_objective(na: f64, n_host: f64) -> Result<f64> {
    if !(na > 0.0) || !(n_host > 0.0) || na >= n_host {
        return Err(Error::invalid(format!(
            "need 0 < NA < n_host, got NA={na}, n={n_host}"
        )));
    }
    Ok(1.0 - (1.0 - (na / n_host).powi(2)).sqrt())
}

/// Cavity collection efficiency `eta_c = kappa_t/(kappa_t+kappa_b) * beta`
/// with `beta = F_P/(F_P+1)`.
pub fn eta_cavity(kappa_top: f64, kappa_bottom: f64, purcell: f64) -> Result<f64> {
    if kappa_top < 0.0 || kappa_bottom < 0.0 {
        return Err(Error::invalid("loss rates must be >= 0"));
    }
    if kappa_top + kappa_bottom == 0.0 {
        return Err(Error::invalid("at least one loss rate must be positive"));
    }
    if !(purcell >= 1.0) {
        return Err(Error::invalid("Purcell factor must be >= 1"));
    }
    let beta = purcell / (purcell + 1.0);
    Ok(kappa_top / (kappa_top + kappa_bottom) * beta)
}

/// Mirror loss channels at the Stokes wavelength, proportional to the
/// mirror power transmittances (lossless-mirror model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorLosses {
    /// Top-mirror power transmittance seen from the air gap.
    pub kappa_top: f64,
    /// Bottom-mirror power transmittance seen from the membrane.
    pub kappa_bottom: f64,
}

impl MirrorLosses {
    pub fn top_fraction(&self) -> f64 {
        self.kappa_top / (self.kappa_top + self.kappa_bottom)
    }
}

/// Derive the kappa rates from the assembly's mirrors at `lambda_nm`:
/// the top mirror is illuminated from the air gap, the bottom mirror from
/// the membrane, both exiting into their substrates.
pub fn mirror_losses(assembly: &CavityAssembly, lambda_nm: f64) -> Result<MirrorLosses> {
    let top = assembly.top_mirror.with_incident(crate::stack::Material::air());
    let bottom = assembly.bottom_mirror.with_incident(assembly.membrane_material.clone());
    Ok(MirrorLosses {
        kappa_top: transmittance(&top, lambda_nm)?,
        kappa_bottom: transmittance(&bottom, lambda_nm)?,
    })
}

/// The assembled enhancement prediction and every factor that entered it.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementBudget {
    pub purcell: f64,
    pub beta: f64,
    pub eta_objective: f64,
    pub eta_cavity: f64,
    pub q_stokes: f64,
    pub q_cavity: f64,
    /// `Q_s / (Q_s + Q_c)`.
    pub spectral_overlap: f64,
    /// `F_P * spectral_overlap * eta_cavity / eta_objective`.
    pub predicted_ratio: f64,
}

/// Assemble the budget `S_c/S_o = F_P * Q_s/(Q_s+Q_c) * eta_c/eta_o`.
pub fn enhancement_budget(
    purcell: f64,
    q_stokes: f64,
    q_cavity: f64,
    eta_cavity: f64,
    eta_objective: f64,
) -> Result<EnhancementBudget> {
    for (name, v) in [
        ("purcell", purcell),
        ("q_stokes", q_stokes),
        ("q_cavity", q_cavity),
        ("eta_cavity", eta_cavity),
        ("eta_objective", eta_objective),
    ] {
        if !(v > 0.0) {
            return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
        }
    }
    let spectral_overlap = q_stokes / (q_stokes + q_cavity);
    Ok(EnhancementBudget {
        purcell,
        beta: purcell / (purcell + 1.0),
        eta_objective,
        eta_cavity,
        q_stokes,
        q_cavity,
        spectral_overlap,
        predicted_ratio: purcell * spectral_overlap * eta_cavity / eta_objective,
    })
}

/// Inputs of the full prediction pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetInputs {
    pub lambda_s_nm: f64,
    /// Cavity quality factor on resonance.
    pub q_cavity: f64,
    /// Stokes FWHM in pm at the Stokes wavelength.
    pub stokes_fwhm_pm: f64,
    /// Representative intensity waist, um.
    pub w_intensity_um: f64,
    /// Collection objective numerical aperture.
    pub na: f64,
    /// Purcell averaging over the field profile in the host.
    pub averaging: f64,
}

impl Default for BudgetInputs {
    fn default() -> Self {
        BudgetInputs {
            lambda_s_nm: 572.67,
            q_cavity: 8200.0,
            stokes_fwhm_pm: 71.0,
            w_intensity_um: 0.77,
            na: 0.4,
            averaging: DEFAULT_AVERAGING,
        }
    }
}

/// Full chain from assembly to predicted enhancement.
#[derive(Debug, Clone)]
pub struct BudgetBreakdown {
    /// Air gap retuned so a resonance sits exactly at the Stokes wavelength.
    pub tuned_air_gap_nm: f64,
    pub e_max_kv_per_m: f64,
    pub mode_volume: ModeVolume,
    pub losses: MirrorLosses,
    pub budget: EnhancementBudget,
}

/// Run the whole prediction: tune the air gap to the Stokes resonance,
/// quantize the standing wave, derive the mode volume and Purcell factor,
/// split the losses between the mirrors and assemble the budget.
pub fn predict_enhancement(
    assembly: &CavityAssembly,
    inputs: &BudgetInputs,
) -> Result<BudgetBreakdown> {
    let crossings = crate::coupledcavity::crossings_at_wavelength(
        assembly,
        inputs.lambda_s_nm,
        (assembly.air_gap_nm - 0.4 * inputs.lambda_s_nm).max(1.0),
        assembly.air_gap_nm + 0.4 * inputs.lambda_s_nm,
    )?;
    let t_a = crossings
        .into_iter()
        .min_by(|a, b| {
            (a - assembly.air_gap_nm)
                .abs()
                .total_cmp(&(b - assembly.air_gap_nm).abs())
        })
        .ok_or_else(|| Error::not_found("no Stokes resonance near the nominal air gap"))?;
    let tuned = assembly.with_air_gap(t_a);
    let profile = crate::tmm::field_profile(&tuned.flatten(), inputs.lambda_s_nm)?;
    let quantized = quantize_field(&profile, inputs.w_intensity_um, inputs.lambda_s_nm)?;
    let host = &assembly.membrane_material;
    let volume = mode_volume(&quantized, host.refractive_index, &host.name)?;
    let purcell = purcell_factor(inputs.q_cavity, volume.lambda_over_n_cubed, inputs.averaging)?;
    let losses = mirror_losses(assembly, inputs.lambda_s_nm)?;
    let eta_c = eta_cavity(losses.kappa_top, losses.kappa_bottom, purcell)?;
    let eta_o = eta_objective(inputs.na, host.refractive_index)?;
    let q_stokes = inputs.lambda_s_nm * 1e3 / inputs.stokes_fwhm_pm;
    let budget = enhancement_budget(purcell, q_stokes, inputs.q_cavity, eta_c, eta_o)?;
    Ok(BudgetBreakdown {
        tuned_air_gap_nm: t_a,
        e_max_kv_per_m: volume.e_max_v_per_m / 1e3,
        mode_volume: volume,
        losses,
        budget,
    })
}

/// Structured budget report with per-factor provenance, suitable for
/// regression diffing.
pub fn format_budget_report(
    breakdown: &BudgetBreakdown,
    inputs: &BudgetInputs,
    measured_reference: Option<f64>,
) -> String {
    let b = &breakdown.budget;
    let mut out = String::new();
    out.push_str("enhancement budget\n");
    out.push_str(&format!(
        "  lambda_s_nm            {:>12.4}   user-supplied\n",
        inputs.lambda_s_nm
    ));
    out.push_str(&format!(
        "  tuned_air_gap_nm       {:>12.3}   computed (resonance condition)\n",
        breakdown.tuned_air_gap_nm
    ));
    out.push_str(&format!(
        "  w_intensity_um         {:>12.4}   user-supplied\n",
        inputs.w_intensity_um
    ));
    out.push_str(&format!(
        "  e_max_kv_per_m         {:>12.3}   computed (field quantization)\n",
        breakdown.e_max_kv_per_m
    ));
    out.push_str(&format!(
        "  v_eff_lambda_n_cubed   {:>12.3}   computed (mode volume)\n",
        breakdown.mode_volume.lambda_over_n_cubed
    ));
    out.push_str(&format!(
        "  v_eff_um3              {:>12.4}   computed (mode volume)\n",
        breakdown.mode_volume.cubic_um
    ));
    out.push_str(&format!("  q_cavity               {:>12.1}   user-supplied\n", b.q_cavity));
    out.push_str(&format!(
        "  averaging              {:>12.3}   user-supplied\n",
        inputs.averaging
    ));
    out.push_str(&format!("  purcell_factor         {:>12.3}   computed\n", b.purcell));
    out.push_str(&format!("  beta                   {:>12.4}   computed\n", b.beta));
    out.push_str(&format!(
        "  kappa_top              {:>12.4e}   computed (top mirror T)\n",
        breakdown.losses.kappa_top
    ));
    out.push_str(&format!(
        "  kappa_bottom           {:>12.4e}   computed (bottom mirror T)\n",
        breakdown.losses.kappa_bottom
    ));
    out.push_str(&format!(
        "  kappa_top_fraction     {:>12.4}   computed\n",
        breakdown.losses.top_fraction()
    ));
    out.push_str(&format!("  eta_cavity             {:>12.4}   computed\n", b.eta_cavity));
    out.push_str(&format!("  eta_objective          {:>12.4}   computed\n", b.eta_objective));
    out.push_str(&format!("  q_stokes               {:>12.1}   computed from linewidth\n", b.q_stokes));
    out.push_str(&format!(
        "  spectral_overlap       {:>12.4}   computed\n",
        b.spectral_overlap
    ));
    out.push_str(&format!(
        "  predicted_S_c_over_S_o {:>12.2}   computed\n",
        b.predicted_ratio
    ));
    if let Some(measured) = measured_reference {
        out.push_str(&format!(
            "  measured_S_c_over_S_o  {:>12.2}   reference (reported, not reconciled)\n",
            measured
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmm::{FieldProfile, LayerField};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    /// Pure standing wave sin(kz) in a uniform unit-index slab.
    fn sine_profile(wavelength_nm: f64, half_waves: usize, amplitude: f64) -> FieldProfile {
        FieldProfile::standing_wave(crate::stack::Material::air(), wavelength_nm, half_waves, amplitude)
    }

    #[test]
    fn uniform_toy_cavity_matches_sine_closed_form() {
        // independent oracle: Int sin^2 over integer half-waves = L/2
        let lam = 572.67;
        let profile = sine_profile(lam, 10, 3.7);
        let l_m = 10.0 * lam / 2.0 * 1e-9;
        let oracle = 3.7 * 3.7 * l_m / 2.0;
        assert_relative_eq!(profile.energy_integral_si(), oracle, max_relative = 1e-9);

        let q = quantize_field(&profile, 0.77, lam).unwrap();
        assert_relative_eq!(q.normalization_ratio(), 1.0, max_relative = 1e-9);
        let omega = angular_frequency(lam);
        let transverse = 2.0 * std::f64::consts::PI * 0.25 * (0.77e-6f64).powi(2);
        let e_expect = (HBAR * omega / 2.0 / (transverse * EPSILON_0 * l_m / 2.0)).sqrt();
        let (e_max, _) = q.max_e_in_material("air");
        assert_relative_eq!(e_max, e_expect, max_relative = 1e-9);
    }

    #[test]
    fn quantization_is_gauge_invariant() {
        let lam = 572.67;
        let a = quantize_field(&sine_profile(lam, 8, 1.0), 0.77, lam).unwrap();
        let b = quantize_field(&sine_profile(lam, 8, 123.456), 0.77, lam).unwrap();
        let (ea, _) = a.max_e_in_material("air");
        let (eb, _) = b.max_e_in_material("air");
        assert_relative_eq!(ea, eb, max_relative = 1e-12);
    }

    #[test]
    fn amplitude_scales_inversely_with_waist() {
        let lam = 572.67;
        let p = sine_profile(lam, 8, 1.0);
        let (e1, _) = quantize_field(&p, 0.77, lam).unwrap().max_e_in_material("air");
        let (e2, _) = quantize_field(&p, 1.54, lam).unwrap().max_e_in_material("air");
        assert_relative_eq!(e1 / e2, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_field_is_rejected() {
        let layer = LayerField {
            material: crate::stack::Material::air(),
            start_nm: 0.0,
            thickness_nm: 100.0,
            forward: Complex64::new(0.0, 0.0),
            backward: Complex64::new(0.0, 0.0),
        };
        let p = FieldProfile::from_layer_fields(600.0, vec![layer]);
        assert!(quantize_field(&p, 0.77, 600.0).is_err());
    }

    #[test]
    fn mode_volume_quadruples_when_field_halves() {
        let lam = 572.67;
        let q = quantize_field(&sine_profile(lam, 8, 1.0), 0.77, lam).unwrap();
        let v1 = mode_volume(&q, 1.0, "air").unwrap();
        // halving E_max at fixed photon energy means quadrupled volume
        let halved = QuantizedField {
            profile: q.profile.scaled(0.5),
            w_intensity_um: q.w_intensity_um,
            photon_energy_j: q.photon_energy_j,
        };
        let v2 = mode_volume(&halved, 1.0, "air").unwrap();
        assert_relative_eq!(v2.cubic_um / v1.cubic_um, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn purcell_examples() {
        let f = purcell_factor(8200.0, 84.9, 0.5).unwrap();
        assert!((f - 4.6698).abs() < 1e-3, "{f}");
        assert!((f - 4.7).abs() < 0.2);
        let antinode = purcell_factor(8200.0, 84.9, 1.0).unwrap();
        assert!((antinode - 8.3395).abs() < 2e-3, "{antinode}");
        let baseline = purcell_factor(0.0, 84.9, 0.5).unwrap();
        assert_relative_eq!(baseline, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn purcell_is_at_least_one_and_linear_in_q() {
        for q in [10.0, 3000.0, 8200.0, 40000.0] {
            let f = purcell_factor(q, 84.9, 0.5).unwrap();
            assert!(f >= 1.0);
            let f2 = purcell_factor(2.0 * q, 84.9, 0.5).unwrap();
            assert_relative_eq!(f2 - 1.0, 2.0 * (f - 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn eta_objective_values_and_monotonicity() {
        let low = eta_objective(0.4, 2.41).unwrap();
        assert!((low - 0.0139).abs() < 5e-5, "{low}");
        let high = eta_objective(0.9, 2.41).unwrap();
        assert!((high - 0.0725).abs() < 5e-4, "{high}");
        assert!(high > low);
        let tiny = eta_objective(1e-6, 2.41).unwrap();
        assert!(tiny < 1e-12);
        assert!(eta_objective(2.5, 2.41).is_err());
    }

    #[test]
    fn eta_cavity_examples() {
        let balanced = eta_cavity(1.0, 1.0, 4.7).unwrap();
        assert!((balanced - 0.412).abs() < 1e-3, "{balanced}");
        let one_sided = eta_cavity(1.0, 0.0, 4.7).unwrap();
        assert_relative_eq!(one_sided, 4.7 / 5.7, epsilon = 1e-12);
        assert!(eta_cavity(0.0, 0.0, 4.7).is_err());
        // monotone in kappa_top at fixed kappa_bottom
        let a = eta_cavity(0.5, 1.0, 4.7).unwrap();
        let b = eta_cavity(0.8, 1.0, 4.7).unwrap();
        assert!(b > a);
    }

    #[test]
    fn budget_identity_holds_exactly() {
        let b = enhancement_budget(4.7, 8066.0, 8200.0, 0.338, 0.01387).unwrap();
        let product = b.purcell * b.spectral_overlap * b.eta_cavity / b.eta_objective;
        assert_eq!(b.predicted_ratio, product);
        assert_relative_eq!(b.beta, 4.7 / 5.7, epsilon = 1e-12);
    }

    #[test]
    fn spectral_overlap_limit() {
        // cavity much broader than the Stokes line: overlap -> 1
        let b = enhancement_budget(4.7, 8066.0, 1e-6, 0.4, 0.0139).unwrap();
        assert!((b.spectral_overlap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pipeline_produces_consistent_budget() {
        let assembly = crate::stack::reference_assembly();
        let breakdown = predict_enhancement(&assembly, &BudgetInputs::default()).unwrap();
        let b = &breakdown.budget;
        assert_relative_eq!(b.beta, b.purcell / (b.purcell + 1.0), epsilon = 1e-12);
        assert!(b.eta_cavity <= b.beta);
        assert!(b.eta_cavity > 0.0 && b.eta_cavity < 1.0);
        assert!(b.eta_objective > 0.0 && b.eta_objective < 1.0);
        assert!((breakdown.tuned_air_gap_nm - assembly.air_gap_nm).abs() < 0.3 * 572.67);
        let report = format_budget_report(&breakdown, &BudgetInputs::default(), Some(58.8));
        assert!(report.contains("predicted_S_c_over_S_o"));
        assert!(report.contains("measured_S_c_over_S_o"));
    }
}
