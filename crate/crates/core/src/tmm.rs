//! One-dimensional transfer-matrix engine for lossless multilayers at normal
//! incidence.
//!
//! The characteristic matrix of a layer with index n and thickness d at
//! vacuum wavelength lambda is
//!
//! ```text
//! M = |  cos(delta)      i sin(delta)/n |        delta = 2 pi n d / lambda
//!     |  i n sin(delta)  cos(delta)     |
//! ```
//!
//! and the stack matrix is the product in propagation order. Reflectance and
//! transmittance follow from `(B, C) = M (1, n_exit)` with the usual
//! admittance formulas. Standing-wave profiles come from a backward pass that
//! sets a unit outgoing wave in the exit medium and propagates interface and
//! phase relations back to the incident side; per-layer plane-wave amplitudes
//! make field maxima and energy integrals available in closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::optim::{fit_least_squares, golden_section_max, LeastSquaresOptions};
use crate::spectrafit::MeasuredSpectrum;
use crate::stack::{Layer, LayerStack, Material};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// 2x2 complex characteristic matrix; unimodular for lossless layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicMatrix {
    pub m00: Complex64,
    pub m01: Complex64,
    pub m10: Complex64,
    pub m11: Complex64,
}

impl CharacteristicMatrix {
    pub fn identity() -> Self {
        CharacteristicMatrix {
            m00: Complex64::new(1.0, 0.0),
            m01: Complex64::new(0.0, 0.0),
            m10: Complex64::new(0.0, 0.0),
            m11: Complex64::new(1.0, 0.0),
        }
    }

    pub fn compose(&self, other: &CharacteristicMatrix) -> Self {
        CharacteristicMatrix {
            m00: self.m00 * other.m00 + self.m01 * other.m10,
            m01: self.m00 * other.m01 + self.m01 * other.m11,
            m10: self.m10 * other.m00 + self.m11 * other.m10,
            m11: self.m10 * other.m01 + self.m11 * other.m11,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.m00 * self.m11 - self.m01 * self.m10
    }
}

/// Characteristic matrix from raw layer parameters. `thickness_nm` may be
/// zero (identity matrix); `wavelength_nm` must be positive.
pub fn characteristic_matrix_parts(
    refractive_index: f64,
    thickness_nm: f64,
    wavelength_nm: f64,
) -> Result<CharacteristicMatrix> {
    if !(wavelength_nm > 0.0) {
        return Err(Error::invalid(format!("wavelength must be > 0, got {wavelength_nm}")));
    }
    let delta = 2.0 * std::f64::consts::PI * refractive_index * thickness_nm / wavelength_nm;
    let (s, c) = delta.sin_cos();
    Ok(CharacteristicMatrix {
        m00: Complex64::new(c, 0.0),
        m01: I * (s / refractive_index),
        m10: I * (s * refractive_index),
        m11: Complex64::new(c, 0.0),
    })
}

/// Characteristic matrix of a layer.
pub fn characteristic_matrix(layer: &Layer, wavelength_nm: f64) -> Result<CharacteristicMatrix> {
    characteristic_matrix_parts(layer.material.refractive_index, layer.thickness_nm, wavelength_nm)
}

fn stack_matrix(stack: &LayerStack, wavelength_nm: f64) -> CharacteristicMatrix {
    let mut m = CharacteristicMatrix::identity();
    let k0 = 2.0 * std::f64::consts::PI / wavelength_nm;
    for layer in &stack.layers {
        let delta = k0 * layer.material.refractive_index * layer.thickness_nm;
        let (s, c) = delta.sin_cos();
        let n = layer.material.refractive_index;
        let lm = CharacteristicMatrix {
            m00: Complex64::new(c, 0.0),
            m01: I * (s / n),
            m10: I * (s * n),
            m11: Complex64::new(c, 0.0),
        };
        m = m.compose(&lm);
    }
    m
}

/// Complex reflection and transmission amplitudes of a stack.
pub fn amplitudes(stack: &LayerStack, wavelength_nm: f64) -> Result<(Complex64, Complex64)> {
    if !(wavelength_nm > 0.0) {
        return Err(Error::invalid(format!("wavelength must be > 0, got {wavelength_nm}")));
    }
    let m = stack_matrix(stack, wavelength_nm);
    let n0 = stack.incident_medium.refractive_index;
    let ns = stack.exit_medium.refractive_index;
    let b = m.m00 + m.m01 * ns;
    let c = m.m10 + m.m11 * ns;
    let denom = n0 * b + c;
    let r = (n0 * b - c) / denom;
    let t = 2.0 * n0 / denom;
    Ok((r, t))
}

/// Power reflectance of a stack at one wavelength.
pub fn reflectance(stack: &LayerStack, wavelength_nm: f64) -> Result<f64> {
    let (r, _) = amplitudes(stack, wavelength_nm)?;
    Ok(r.norm_sqr())
}

/// Power transmittance of a stack at one wavelength.
pub fn transmittance(stack: &LayerStack, wavelength_nm: f64) -> Result<f64> {
    let (_, t) = amplitudes(stack, wavelength_nm)?;
    let n0 = stack.incident_medium.refractive_index;
    let ns = stack.exit_medium.refractive_index;
    Ok(t.norm_sqr() * ns / n0)
}

/// Reflectance/transmittance over a wavelength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub wavelengths_nm: Vec<f64>,
    pub reflectance: Vec<f64>,
    pub transmittance: Vec<f64>,
}

/// Sweep a stack over a strictly increasing, positive wavelength grid.
pub fn spectrum(stack: &LayerStack, wavelengths_nm: &[f64]) -> Result<ComplexSpectrum> {
    if wavelengths_nm.is_empty() {
        return Err(Error::invalid("empty wavelength grid"));
    }
    for w in wavelengths_nm.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid("wavelength grid must be strictly increasing"));
        }
    }
    let n0 = stack.incident_medium.refractive_index;
    let ns = stack.exit_medium.refractive_index;
    let mut reflectance_v = Vec::with_capacity(wavelengths_nm.len());
    let mut transmittance_v = Vec::with_capacity(wavelengths_nm.len());
    for &lam in wavelengths_nm {
        let (r, t) = amplitudes(stack, lam)?;
        reflectance_v.push(r.norm_sqr());
        transmittance_v.push(t.norm_sqr() * ns / n0);
    }
    Ok(ComplexSpectrum {
        wavelengths_nm: wavelengths_nm.to_vec(),
        reflectance: reflectance_v,
        transmittance: transmittance_v,
    })
}

/// Uniform grid helper.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + i as f64 * step).collect()
}

// ---------------------------------------------------------------------------
// Stopband
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stopband {
    pub center_nm: f64,
    pub low_edge_nm: f64,
    pub high_edge_nm: f64,
}

impl Stopband {
    pub fn contains(&self, wavelength_nm: f64) -> bool {
        wavelength_nm >= self.low_edge_nm && wavelength_nm <= self.high_edge_nm
    }
}

/// Locate the high-reflectivity stopband of a mirror spectrum.
///
/// Edges are the outermost contiguous threshold crossings around the
/// reflectance maximum, linearly interpolated between grid points; the center
/// is their midpoint.
pub fn stopband(spectrum: &ComplexSpectrum, threshold: f64) -> Result<Stopband> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!("threshold must be in (0,1), got {threshold}")));
    }
    let r = &spectrum.reflectance;
    let lam = &spectrum.wavelengths_nm;
    let (imax, rmax) =
        r.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if rmax < threshold {
        return Err(Error::not_found(format!(
            "no reflectance above threshold {threshold} (max {rmax:.4})"
        )));
    }
    let mut lo = imax;
    while lo > 0 && r[lo - 1] >= threshold {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < r.len() && r[hi + 1] >= threshold {
        hi += 1;
    }
    let low_edge = if lo == 0 {
        lam[0]
    } else {
        let f = (threshold - r[lo - 1]) / (r[lo] - r[lo - 1]);
        lam[lo - 1] + f * (lam[lo] - lam[lo - 1])
    };
    let high_edge = if hi + 1 == r.len() {
        lam[hi]
    } else {
        let f = (r[hi] - threshold) / (r[hi] - r[hi + 1]);
        lam[hi] + f * (lam[hi + 1] - lam[hi])
    };
    Ok(Stopband {
        center_nm: 0.5 * (low_edge + high_edge),
        low_edge_nm: low_edge,
        high_edge_nm: high_edge,
    })
}

pub const DEFAULT_STOPBAND_THRESHOLD: f64 = 0.99;

// ---------------------------------------------------------------------------
// Field profiles
// ---------------------------------------------------------------------------

/// Plane-wave amplitudes of one layer:
/// `E(z) = forward exp(i k (z - start)) + backward exp(-i k (z - start))`
/// with `k = 2 pi n / lambda` and z measured along the stack axis.
#[derive(Debug, Clone)]
pub struct LayerField {
    pub material: Material,
    pub start_nm: f64,
    pub thickness_nm: f64,
    pub forward: Complex64,
    pub backward: Complex64,
}

impl LayerField {
    fn wavenumber(&self, wavelength_nm: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.material.refractive_index / wavelength_nm
    }

    /// |E| at local coordinate zl in [0, thickness].
    fn abs_e_local(&self, zl: f64, wavelength_nm: f64) -> f64 {
        let k = self.wavenumber(wavelength_nm);
        let ph = Complex64::from_polar(1.0, k * zl);
        (self.forward * ph + self.backward / ph).norm()
    }

    /// Exact integral of |E(z)|^2 over the layer, in (field)^2 * nm.
    fn integral_e2(&self, wavelength_nm: f64) -> f64 {
        let k = self.wavenumber(wavelength_nm);
        let d = self.thickness_nm;
        let a2 = self.forward.norm_sqr() + self.backward.norm_sqr();
        let cross = self.forward * self.backward.conj();
        // integral of 2 Re[cross e^{2ikz}] dz = Re[cross (e^{2ikd}-1)/(ik)]
        let osc = if k == 0.0 {
            2.0 * cross.re * d
        } else {
            (cross * (Complex64::from_polar(1.0, 2.0 * k * d) - 1.0) / (I * k)).re
        };
        a2 * d + osc
    }

    /// Exact maximum of |E| over the layer and its local position.
    fn max_abs_e(&self, wavelength_nm: f64) -> (f64, f64) {
        let k = self.wavenumber(wavelength_nm);
        let d = self.thickness_nm;
        let rho = (self.forward * self.backward.conj()).norm();
        let theta = (self.forward * self.backward.conj()).arg();
        // |E|^2 = |a|^2+|b|^2 + 2 rho cos(2kz + theta); peak where 2kz+theta = 2 pi m
        let mut best = (self.abs_e_local(0.0, wavelength_nm), 0.0);
        let end = (self.abs_e_local(d, wavelength_nm), d);
        if end.0 > best.0 {
            best = end;
        }
        if k > 0.0 && rho > 0.0 {
            let m_lo = (theta / (2.0 * std::f64::consts::PI)).floor() as i64;
            let m_hi = ((2.0 * k * d + theta) / (2.0 * std::f64::consts::PI)).ceil() as i64;
            for m in m_lo..=m_hi {
                let z = (2.0 * std::f64::consts::PI * m as f64 - theta) / (2.0 * k);
                if z >= 0.0 && z <= d {
                    let v = self.abs_e_local(z, wavelength_nm);
                    if v > best.0 {
                        best = (v, z);
                    }
                }
            }
        }
        best
    }
}

/// Standing-wave field of a stack at one wavelength, stored as per-layer
/// plane-wave amplitudes. Amplitudes are normalized to a unit outgoing wave
/// in the exit medium until rescaled (see the quantization module).
#[derive(Debug, Clone)]
pub struct FieldProfile {
    pub wavelength_nm: f64,
    pub layers: Vec<LayerField>,
    /// Complex reflection amplitude seen from the incident medium,
    /// consistent with [`amplitudes`].
    pub reflection: Complex64,
    /// Complex transmission amplitude into the exit medium.
    pub transmission: Complex64,
}

/// Sampled |E(z)| and n(z) for export and plotting.
#[derive(Debug, Clone)]
pub struct FieldSamples {
    pub z_nm: Vec<f64>,
    pub refractive_index: Vec<f64>,
    pub abs_e: Vec<f64>,
}

impl FieldProfile {
    pub fn total_thickness_nm(&self) -> f64 {
        self.layers.last().map(|l| l.start_nm + l.thickness_nm).unwrap_or(0.0)
    }

    /// |E| at absolute position z (clamped to the stack extent).
    pub fn abs_e(&self, z_nm: f64) -> f64 {
        let z = z_nm.clamp(0.0, self.total_thickness_nm());
        for l in &self.layers {
            if z <= l.start_nm + l.thickness_nm {
                return l.abs_e_local(z - l.start_nm, self.wavelength_nm);
            }
        }
        self.layers
            .last()
            .map(|l| l.abs_e_local(l.thickness_nm, self.wavelength_nm))
            .unwrap_or(0.0)
    }

    /// Sample |E(z)| with the given step; every interface position is
    /// included so the exported profile shows the n(z) steps exactly.
    pub fn samples(&self, step_nm: f64) -> Result<FieldSamples> {
        if !(step_nm > 0.0) {
            return Err(Error::invalid(format!("sampling step must be > 0, got {step_nm}")));
        }
        let mut z_nm = Vec::new();
        let mut refractive_index = Vec::new();
        let mut abs_e = Vec::new();
        for l in &self.layers {
            let mut zl = 0.0;
            while zl < l.thickness_nm {
                z_nm.push(l.start_nm + zl);
                refractive_index.push(l.material.refractive_index);
                abs_e.push(l.abs_e_local(zl, self.wavelength_nm));
                zl += step_nm;
            }
        }
        if let Some(l) = self.layers.last() {
            z_nm.push(l.start_nm + l.thickness_nm);
            refractive_index.push(l.material.refractive_index);
            abs_e.push(l.abs_e_local(l.thickness_nm, self.wavelength_nm));
        }
        Ok(FieldSamples { z_nm, refractive_index, abs_e })
    }

    /// Exact integral of n(z)^2 |E(z)|^2 over all layers, in (field)^2 * m.
    pub fn energy_integral_si(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                let n2 = l.material.refractive_index * l.material.refractive_index;
                n2 * l.integral_e2(self.wavelength_nm) * 1e-9
            })
            .sum()
    }

    /// Exact integral of n^2 |E|^2 over layers of one material, (field)^2 * m.
    pub fn energy_integral_in_material_si(&self, material_name: &str) -> f64 {
        self.layers
            .iter()
            .filter(|l| l.material.name == material_name)
            .map(|l| {
                let n2 = l.material.refractive_index * l.material.refractive_index;
                n2 * l.integral_e2(self.wavelength_nm) * 1e-9
            })
            .sum()
    }

    /// Total thickness of layers of one material, nm.
    pub fn thickness_of_material_nm(&self, material_name: &str) -> f64 {
        self.layers
            .iter()
            .filter(|l| l.material.name == material_name)
            .map(|l| l.thickness_nm)
            .sum()
    }

    /// Exact maximum of |E| over layers of one material; returns
    /// (value, absolute position). Zero if the material is absent.
    pub fn max_abs_e_in_material(&self, material_name: &str) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        for l in &self.layers {
            if l.material.name == material_name {
                let (v, zl) = l.max_abs_e(self.wavelength_nm);
                if v > best.0 {
                    best = (v, l.start_nm + zl);
                }
            }
        }
        best
    }

    /// Multiply every amplitude by a real scale factor.
    pub fn scaled(&self, factor: f64) -> FieldProfile {
        FieldProfile {
            wavelength_nm: self.wavelength_nm,
            layers: self
                .layers
                .iter()
                .map(|l| LayerField {
                    material: l.material.clone(),
                    start_nm: l.start_nm,
                    thickness_nm: l.thickness_nm,
                    forward: l.forward * factor,
                    backward: l.backward * factor,
                })
                .collect(),
            reflection: self.reflection,
            transmission: self.transmission,
        }
    }

    /// Build a profile directly from per-layer amplitudes (used for analytic
    /// reference profiles in tests and for ingesting external data).
    pub fn from_layer_fields(wavelength_nm: f64, layers: Vec<LayerField>) -> FieldProfile {
        FieldProfile {
            wavelength_nm,
            layers,
            reflection: Complex64::new(0.0, 0.0),
            transmission: Complex64::new(1.0, 0.0),
        }
    }

    /// Analytic pure standing wave `E(z) = amplitude sin(k z)` spanning an
    /// integer number of half waves in a single uniform medium.
    pub fn standing_wave(
        material: Material,
        wavelength_nm: f64,
        half_waves: usize,
        amplitude: f64,
    ) -> FieldProfile {
        let k_amp = Complex64::new(0.0, -0.5) * amplitude; // amplitude/(2i)
        let thickness =
            half_waves as f64 * wavelength_nm / (2.0 * material.refractive_index);
        let layer = LayerField {
            material,
            start_nm: 0.0,
            thickness_nm: thickness,
            forward: k_amp,
            backward: -k_amp,
        };
        FieldProfile::from_layer_fields(wavelength_nm, vec![layer])
    }
}

/// Standing-wave field profile of a stack at one wavelength.
///
/// The backward pass keeps E and H continuous across every interface, so
/// |E(z)| is continuous through the whole structure.
pub fn field_profile(stack: &LayerStack, wavelength_nm: f64) -> Result<FieldProfile> {
    if !(wavelength_nm > 0.0) {
        return Err(Error::invalid(format!("wavelength must be > 0, got {wavelength_nm}")));
    }
    let k0 = 2.0 * std::f64::consts::PI / wavelength_nm;
    // (forward, backward) referenced at each layer's start, filled back to front
    let mut fields: Vec<(Complex64, Complex64)> = vec![(Complex64::default(), Complex64::default()); stack.layers.len()];
    let mut fwd = Complex64::new(1.0, 0.0); // unit outgoing wave in the exit medium
    let mut bwd = Complex64::new(0.0, 0.0);
    let mut n_right = stack.exit_medium.refractive_index;
    for (idx, layer) in stack.layers.iter().enumerate().rev() {
        let n = layer.material.refractive_index;
        let r = (n - n_right) / (n + n_right);
        let t = 2.0 * n / (n + n_right);
        // amplitudes just left of the interface, referenced there
        let f_right = (fwd + r * bwd) / t;
        let b_right = (r * fwd + bwd) / t;
        // translate reference to the layer start
        let ph = Complex64::from_polar(1.0, k0 * n * layer.thickness_nm);
        fwd = f_right / ph;
        bwd = b_right * ph;
        fields[idx] = (fwd, bwd);
        n_right = n;
    }
    // incident-medium amplitudes at the first interface
    let n0 = stack.incident_medium.refractive_index;
    let r0 = (n0 - n_right) / (n0 + n_right);
    let t0 = 2.0 * n0 / (n0 + n_right);
    let inc_f = (fwd + r0 * bwd) / t0;
    let inc_b = (r0 * fwd + bwd) / t0;
    let reflection = inc_b / inc_f;
    let transmission = Complex64::new(1.0, 0.0) / inc_f;

    let mut z = 0.0;
    let layers = stack
        .layers
        .iter()
        .zip(fields)
        .map(|(layer, (f, b))| {
            let lf = LayerField {
                material: layer.material.clone(),
                start_nm: z,
                thickness_nm: layer.thickness_nm,
                // renormalize so the incident forward wave has unit amplitude
                forward: f / inc_f,
                backward: b / inc_f,
            };
            z += layer.thickness_nm;
            lf
        })
        .collect();
    Ok(FieldProfile { wavelength_nm, layers, reflection, transmission })
}

// ---------------------------------------------------------------------------
// Resonances
// ---------------------------------------------------------------------------

/// A transmittance peak of a cavity stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub wavelength_nm: f64,
    pub transmittance: f64,
}

/// Golden-section refinement target for resonance wavelengths, nm (0.1 pm).
pub const RESONANCE_TOL_NM: f64 = 1e-4;

/// Find transmittance peaks in [lo, hi], scanning with `step_nm` and refining
/// each interior maximum by golden-section search to 0.1 pm.
pub fn find_resonances(
    stack: &LayerStack,
    lo_nm: f64,
    hi_nm: f64,
    step_nm: f64,
) -> Result<Vec<Resonance>> {
    if !(lo_nm > 0.0 && hi_nm > lo_nm && step_nm > 0.0) {
        return Err(Error::invalid("resonance window must be positive and increasing"));
    }
    let n = ((hi_nm - lo_nm) / step_nm).ceil() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|i| lo_nm + i as f64 * step_nm).collect();
    let t: Vec<f64> = grid.iter().map(|&l| transmittance(stack, l).unwrap_or(0.0)).collect();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if t[i] > t[i - 1] && t[i] >= t[i + 1] && t[i] > 1e-9 {
            let mut f = |l: f64| transmittance(stack, l).unwrap_or(0.0);
            let peak = golden_section_max(&mut f, grid[i - 1], grid[i + 1], RESONANCE_TOL_NM);
            let tv = transmittance(stack, peak)?;
            // dedupe shoulders that refine onto the same peak
            if out
                .last()
                .map(|p: &Resonance| (p.wavelength_nm - peak).abs() > 10.0 * RESONANCE_TOL_NM)
                .unwrap_or(true)
            {
                out.push(Resonance { wavelength_nm: peak, transmittance: tv });
            }
        }
    }
    Ok(out)
}

/// The resonance closest to `near_nm` within +- `half_window_nm`, if any.
pub fn resonance_near(
    stack: &LayerStack,
    near_nm: f64,
    half_window_nm: f64,
    step_nm: f64,
) -> Result<Resonance> {
    let peaks = find_resonances(stack, near_nm - half_window_nm, near_nm + half_window_nm, step_nm)?;
    peaks
        .into_iter()
        .min_by(|a, b| {
            (a.wavelength_nm - near_nm)
                .abs()
                .total_cmp(&(b.wavelength_nm - near_nm).abs())
        })
        .ok_or_else(|| Error::not_found(format!("no resonance within {half_window_nm} nm of {near_nm} nm")))
}

// ---------------------------------------------------------------------------
// Measured-transmission refinement
// ---------------------------------------------------------------------------

/// Outcome of [`refine_stack`].
#[derive(Debug, Clone)]
pub struct RefineResult {
    pub stack: LayerStack,
    /// Per-layer thickness multipliers actually applied.
    pub multipliers: Vec<f64>,
    /// RMS transmittance residual of the refined stack.
    pub residual: f64,
    /// RMS residual of the unrefined stack.
    pub initial_residual: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Default per-layer thickness tolerance of the refinement.
pub const DEFAULT_THICKNESS_TOLERANCE: f64 = 0.03;

/// Refine per-layer thicknesses against a measured, unit-normalized
/// transmission spectrum.
///
/// Each layer thickness is multiplied by a free parameter bounded to
/// `[1 - tolerance, 1 + tolerance]`; a one-dimensional common-scale scan
/// seeds a damped least-squares pass with a 10^4-evaluation budget. Steps
/// are only accepted when they reduce the residual, so the returned residual
/// never exceeds the initial one. Zero tolerance returns the stack unchanged.
pub fn refine_stack(
    stack: &LayerStack,
    measured: &MeasuredSpectrum,
    tolerance: f64,
) -> Result<RefineResult> {
    if tolerance < 0.0 || !tolerance.is_finite() {
        return Err(Error::invalid(format!("tolerance must be >= 0, got {tolerance}")));
    }
    let lam = &measured.wavelengths_nm;
    let target = &measured.counts;
    if lam.len() < 2 {
        return Err(Error::invalid("measured spectrum too short"));
    }
    let nl = stack.layers.len();
    let rms = |stack: &LayerStack| -> f64 {
        let mut acc = 0.0;
        for (l, y) in lam.iter().zip(target) {
            let t = transmittance(stack, *l).unwrap_or(0.0);
            acc += (t - y) * (t - y);
        }
        (acc / lam.len() as f64).sqrt()
    };
    let initial_residual = rms(stack);
    if tolerance == 0.0 || nl == 0 {
        return Ok(RefineResult {
            stack: stack.clone(),
            multipliers: vec![1.0; nl],
            residual: initial_residual,
            initial_residual,
            converged: true,
            evaluations: 1,
        });
    }

    let apply = |mult: &[f64]| -> LayerStack {
        let mut s = stack.clone();
        for (layer, m) in s.layers.iter_mut().zip(mult) {
            layer.thickness_nm *= m;
        }
        s
    };

    // common-scale seed: the dominant error mode of a deposited stack
    let mut scale_cost = |s: f64| -> f64 { rms(&apply(&vec![s; nl])) };
    let mut best_seed = 1.0;
    let mut best_cost = scale_cost(1.0);
    let coarse = 24;
    for i in 0..=coarse {
        let s = 1.0 - tolerance + 2.0 * tolerance * i as f64 / coarse as f64;
        let c = scale_cost(s);
        if c < best_cost {
            best_cost = c;
            best_seed = s;
        }
    }
    let coarse_step = tolerance / coarse as f64;
    let lo = (best_seed - 2.0 * coarse_step).max(1.0 - tolerance);
    let hi = (best_seed + 2.0 * coarse_step).min(1.0 + tolerance);
    let seed = crate::optim::golden_section_min(&mut scale_cost, lo, hi, 1e-6);

    let mut evaluations = 0usize;
    let mut residual_fn = |mult: &[f64]| -> Vec<f64> {
        evaluations += 1;
        let s = apply(mult);
        lam.iter()
            .zip(target)
            .map(|(l, y)| transmittance(&s, *l).unwrap_or(0.0) - y)
            .collect()
    };
    let opts = LeastSquaresOptions {
        max_evaluations: 10_000,
        max_iterations: 400,
        ..Default::default()
    };
    let fit = fit_least_squares(
        &mut residual_fn,
        &vec![seed; nl],
        &vec![1.0 - tolerance; nl],
        &vec![1.0 + tolerance; nl],
        &opts,
    )?;
    let residual = (fit.cost / lam.len() as f64).sqrt();
    let (multipliers, residual) = if residual <= initial_residual {
        (fit.params, residual)
    } else {
        (vec![1.0; nl], initial_residual)
    };
    Ok(RefineResult {
        stack: apply(&multipliers),
        multipliers,
        residual,
        initial_residual,
        converged: fit.converged,
        evaluations,
    })
}
