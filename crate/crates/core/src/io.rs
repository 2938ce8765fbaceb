//! Delimited-text formatting of the computed artifacts. All columns are
//! headed, tab-separated, with a decimal point regardless of locale.

use crate::coupledcavity::ModeMap;
use crate::gaussmodes::DispersionPoint;
use crate::tmm::{ComplexSpectrum, FieldSamples};

pub fn format_spectrum(s: &ComplexSpectrum) -> String {
    let mut out = String::from("wavelength_nm\tR\tT\n");
    for i in 0..s.wavelengths_nm.len() {
        out.push_str(&format!(
            "{:.6}\t{:.9}\t{:.9}\n",
            s.wavelengths_nm[i], s.reflectance[i], s.transmittance[i]
        ));
    }
    out
}

pub fn format_field(samples: &FieldSamples) -> String {
    let mut out = String::from("z_nm\tn\tabs_E\n");
    for i in 0..samples.z_nm.len() {
        out.push_str(&format!(
            "{:.4}\t{:.4}\t{:.9e}\n",
            samples.z_nm[i], samples.refractive_index[i], samples.abs_e[i]
        ));
    }
    out
}

pub fn format_mode_map(map: &ModeMap) -> String {
    let mut out = String::from("t_a_nm\tlambda_nm\tweight\tbranch_id\n");
    for (i, gap) in map.air_gaps_nm.iter().enumerate() {
        for res in &map.resonances[i] {
            out.push_str(&format!(
                "{:.3}\t{:.6}\t{:.6e}\t{}\n",
                gap, res.wavelength_nm, res.weight, res.branch_id
            ));
        }
    }
    out
}

pub fn format_dispersion(points: &[DispersionPoint]) -> String {
    let mut out = String::from("delta_L_nm\tq\tn\tm\n");
    for p in points {
        out.push_str(&format!(
            "{:.4}\t{}\t{}\t{}\n",
            p.delta_l_nm, p.mode.q, p.mode.n, p.mode.m
        ));
    }
    out
}
