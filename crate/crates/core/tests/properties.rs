//! Property tests of the structural invariants.

use proptest::prelude::*;

use fpcav_core::gaussmodes::{beam_waists, effective_length, length_residual, ModeIndex};
use fpcav_core::purcell::{enhancement_budget, quantize_field};
use fpcav_core::raman::{
    linewidth_convert, pump_wavelength, stokes_wavelength, LinewidthUnit,
};
use fpcav_core::stack::{Layer, LayerStack, Material};
use fpcav_core::tmm::{reflectance, transmittance, FieldProfile};

fn material(n: f64) -> Material {
    Material::new("m", n).unwrap()
}

fn stack_strategy() -> impl Strategy<Value = (LayerStack, f64)> {
    (
        1.0..3.0f64,
        1.0..3.0f64,
        prop::collection::vec((1.0..3.0f64, 1.0..900.0f64), 0..10),
        300.0..1200.0f64,
    )
        .prop_map(|(n_in, n_out, layers, lambda)| {
            let stack = LayerStack {
                incident_medium: material(n_in),
                layers: layers
                    .into_iter()
                    .map(|(n, d)| Layer::new(material(n), d).unwrap())
                    .collect(),
                exit_medium: material(n_out),
            };
            (stack, lambda)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn energy_is_conserved((stack, lambda) in stack_strategy()) {
        let r = reflectance(&stack, lambda).unwrap();
        let t = transmittance(&stack, lambda).unwrap();
        prop_assert!((r + t - 1.0).abs() < 1e-9, "R+T-1 = {:e}", r + t - 1.0);
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn concatenation_matches_flattened((stack, lambda) in stack_strategy()) {
        // splitting the layer list anywhere must not change the spectrum
        let split = stack.layers.len() / 2;
        let first = LayerStack {
            incident_medium: stack.incident_medium.clone(),
            layers: stack.layers[..split].to_vec(),
            exit_medium: stack.exit_medium.clone(),
        };
        let second = LayerStack {
            incident_medium: stack.incident_medium.clone(),
            layers: stack.layers[split..].to_vec(),
            exit_medium: stack.exit_medium.clone(),
        };
        let mut joined = first.clone();
        joined.layers.extend(second.layers.clone());
        let direct = transmittance(&stack, lambda).unwrap();
        let recombined = transmittance(&joined, lambda).unwrap();
        prop_assert!((direct - recombined).abs() < 1e-12);
    }

    #[test]
    fn fresnel_limit_for_arbitrary_index_pairs(n1 in 1.0..3.5f64, n2 in 1.0..3.5f64,
                                               lambda in 300.0..1200.0f64) {
        let stack = LayerStack::bare_interface(material(n1), material(n2));
        let r = reflectance(&stack, lambda).unwrap();
        let fresnel = ((n1 - n2) / (n1 + n2)).powi(2);
        prop_assert!((r - fresnel).abs() < 1e-12);
    }

    #[test]
    fn stokes_round_trip(pump in 300.0..1000.0f64, shift in 1.0..5000.0f64) {
        if let Ok(stokes) = stokes_wavelength(pump, shift) {
            let back = pump_wavelength(stokes, shift).unwrap();
            prop_assert!((back - pump).abs() / pump < 1e-9);
        }
    }

    #[test]
    fn linewidth_conversions_round_trip(pm in 0.1..1000.0f64, reference in 300.0..1000.0f64) {
        let ghz = linewidth_convert(
            pm, LinewidthUnit::Picometers, LinewidthUnit::Gigahertz, Some(reference),
        ).unwrap();
        let back = linewidth_convert(
            ghz, LinewidthUnit::Gigahertz, LinewidthUnit::Picometers, Some(reference),
        ).unwrap();
        prop_assert!((back - pm).abs() / pm < 1e-12);
        let q = linewidth_convert(
            pm, LinewidthUnit::Picometers, LinewidthUnit::Quality, Some(reference),
        ).unwrap();
        prop_assert!((q - reference * 1e3 / pm).abs() / q < 1e-12);
    }

    #[test]
    fn effective_length_satisfies_equation_and_grows_with_q(
        q in 1u32..20, r_cav in 5.0..500.0f64, lambda in 400.0..900.0f64,
    ) {
        let mode = ModeIndex { q, n: 0, m: 0 };
        if let Ok(l) = effective_length(mode, lambda, r_cav) {
            prop_assert!(length_residual(mode, lambda, r_cav, l).abs() < 1e-9 * l);
            if let Ok(next) = effective_length(ModeIndex { q: q + 1, n: 0, m: 0 }, lambda, r_cav) {
                prop_assert!(next > l);
            }
        }
    }

    #[test]
    fn intensity_waist_convention(l_frac in 0.05..0.95f64, r_cav in 5.0..50.0f64,
                                  lambda in 400.0..900.0f64) {
        let l = l_frac * r_cav;
        let w = beam_waists(l, r_cav, lambda).unwrap();
        prop_assert!((w.w0_intensity_um * std::f64::consts::SQRT_2 - w.w0_field_um).abs() < 1e-12);
        prop_assert!(
            (w.w_mirror_intensity_um * std::f64::consts::SQRT_2 - w.w_mirror_field_um).abs() < 1e-12
        );
        prop_assert!(w.w_mirror_field_um >= w.w0_field_um);
    }

    #[test]
    fn quantization_gauge_invariance(amplitude in 0.001..1000.0f64,
                                     half_waves in 1usize..20) {
        let lambda = 572.67;
        let reference = quantize_field(
            &FieldProfile::standing_wave(Material::air(), lambda, half_waves, 1.0),
            0.77,
            lambda,
        ).unwrap();
        let scaled = quantize_field(
            &FieldProfile::standing_wave(Material::air(), lambda, half_waves, amplitude),
            0.77,
            lambda,
        ).unwrap();
        let (a, _) = reference.max_e_in_material("air");
        let (b, _) = scaled.max_e_in_material("air");
        prop_assert!((a - b).abs() / a < 1e-9);
    }

    #[test]
    fn budget_is_product_of_factors(purcell in 1.0..50.0f64, qs in 100.0..50_000.0f64,
                                    qc in 100.0..50_000.0f64, eta_c in 0.001..1.0f64,
                                    eta_o in 0.001..1.0f64) {
        let b = enhancement_budget(purcell, qs, qc, eta_c, eta_o).unwrap();
        let product = b.purcell * b.spectral_overlap * b.eta_cavity / b.eta_objective;
        prop_assert_eq!(b.predicted_ratio, product);
        prop_assert!(b.purcell >= 1.0);
        prop_assert!(b.beta < 1.0 && b.beta > 0.0);
    }
}
