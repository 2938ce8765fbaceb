//! Data model for multilayer dielectric structures.
//!
//! A [`LayerStack`] lists layers in propagation order: index 0 is the layer
//! first struck by the incident light. Mirror stacks built by
//! [`build_quarter_wave_dbr`] are ordered cavity-side first, so a bottom
//! mirror must be reversed when flattened into a full cavity (handled by
//! [`CavityAssembly::flatten`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lossless, non-dispersive dielectric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Real refractive index, >= 1 for every material used here.
    pub refractive_index: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, refractive_index: f64) -> Result<Self> {
        if !refractive_index.is_finite() || refractive_index < 1.0 {
            return Err(Error::invalid(format!(
                "refractive index must be finite and >= 1, got {refractive_index}"
            )));
        }
        Ok(Material { name: name.into(), refractive_index })
    }

    pub fn air() -> Self {
        Material { name: "air".into(), refractive_index: 1.0 }
    }

    pub fn silica() -> Self {
        Material { name: "SiO2".into(), refractive_index: crate::constants::N_SILICA }
    }

    pub fn tantala() -> Self {
        Material { name: "Ta2O5".into(), refractive_index: crate::constants::N_TANTALA }
    }

    pub fn diamond() -> Self {
        Material { name: "diamond".into(), refractive_index: crate::constants::N_DIAMOND }
    }
}

/// One physical layer of a stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: Material,
    /// Physical thickness in nm, > 0.
    pub thickness_nm: f64,
}

impl Layer {
    pub fn new(material: Material, thickness_nm: f64) -> Result<Self> {
        if !thickness_nm.is_finite() || thickness_nm <= 0.0 {
            return Err(Error::invalid(format!(
                "layer thickness must be finite and > 0, got {thickness_nm}"
            )));
        }
        Ok(Layer { material, thickness_nm })
    }

    /// Optical thickness n*d in nm.
    pub fn optical_thickness_nm(&self) -> f64 {
        self.material.refractive_index * self.thickness_nm
    }
}

/// Ordered multilayer between two semi-infinite media. The layer list may be
/// empty (a bare interface).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub incident_medium: Material,
    pub layers: Vec<Layer>,
    pub exit_medium: Material,
}

impl LayerStack {
    pub fn bare_interface(incident: Material, exit: Material) -> Self {
        LayerStack { incident_medium: incident, layers: Vec::new(), exit_medium: exit }
    }

    /// Total physical thickness of the layers, nm.
    pub fn total_thickness_nm(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }

    /// A copy with the layer order reversed and the end media swapped,
    /// i.e. the same physical structure illuminated from the other side.
    pub fn reversed(&self) -> Self {
        LayerStack {
            incident_medium: self.exit_medium.clone(),
            layers: self.layers.iter().rev().cloned().collect(),
            exit_medium: self.incident_medium.clone(),
        }
    }

    /// Replace the incident medium (used when a mirror is embedded in a
    /// cavity and faces the intracavity medium instead of air).
    pub fn with_incident(&self, incident: Material) -> Self {
        LayerStack { incident_medium: incident, ..self.clone() }
    }
}

/// Orientation of a mirror stack inside an assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MirrorOrientation {
    /// Layer 0 of the mirror stack faces the cavity interior.
    CavitySideFirst,
    /// Layer 0 of the mirror stack faces its substrate.
    SubstrateSideFirst,
}

/// Plano-concave cavity: bottom mirror carrying the membrane, an air gap and
/// the top mirror. Both mirrors are stored cavity-side first, as built by
/// [`build_quarter_wave_dbr`]; the orientation fields record this so a
/// flattened stack can be parsed back unambiguously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityAssembly {
    pub bottom_mirror: LayerStack,
    pub bottom_orientation: MirrorOrientation,
    pub membrane_material: Material,
    /// Membrane thickness t_d, nm (> 0).
    pub membrane_thickness_nm: f64,
    /// Air gap t_a between membrane surface and top mirror, nm (>= 0).
    pub air_gap_nm: f64,
    pub top_mirror: LayerStack,
    pub top_orientation: MirrorOrientation,
}

impl CavityAssembly {
    /// Flatten into a single stack in propagation order: light enters from
    /// the bottom-mirror substrate, crosses bottom mirror, membrane, air gap
    /// and top mirror, and exits into the top-mirror substrate. A zero air
    /// gap omits the air layer.
    pub fn flatten(&self) -> LayerStack {
        // bring the bottom mirror into substrate-side-first order
        let (bottom_layers, bottom_substrate) = match self.bottom_orientation {
            MirrorOrientation::CavitySideFirst => {
                let r = self.bottom_mirror.reversed();
                (r.layers, self.bottom_mirror.exit_medium.clone())
            }
            MirrorOrientation::SubstrateSideFirst => (
                self.bottom_mirror.layers.clone(),
                self.bottom_mirror.incident_medium.clone(),
            ),
        };
        let mut layers = bottom_layers;
        layers.push(Layer {
            material: self.membrane_material.clone(),
            thickness_nm: self.membrane_thickness_nm,
        });
        if self.air_gap_nm > 0.0 {
            layers.push(Layer { material: Material::air(), thickness_nm: self.air_gap_nm });
        }
        // top mirror in cavity-side-first order
        let (top_layers, top_substrate) = match self.top_orientation {
            MirrorOrientation::CavitySideFirst => {
                (self.top_mirror.layers.clone(), self.top_mirror.exit_medium.clone())
            }
            MirrorOrientation::SubstrateSideFirst => {
                let r = self.top_mirror.reversed();
                let substrate = self.top_mirror.incident_medium.clone();
                (r.layers, substrate)
            }
        };
        layers.extend(top_layers);
        LayerStack { incident_medium: bottom_substrate, layers, exit_medium: top_substrate }
    }

    /// Inverse of [`flatten`](Self::flatten) given the two mirror layer
    /// counts. Fails if the inner layers are missing or the counts do not
    /// add up.
    pub fn from_flattened(
        stack: &LayerStack,
        bottom_layer_count: usize,
        top_layer_count: usize,
        membrane_material: &Material,
    ) -> Result<Self> {
        let n = stack.layers.len();
        if n < bottom_layer_count + top_layer_count + 1 {
            return Err(Error::invalid(format!(
                "flattened stack has {n} layers, fewer than mirrors plus membrane"
            )));
        }
        let inner = &stack.layers[bottom_layer_count..n - top_layer_count];
        let (membrane, air_gap_nm) = match inner {
            [m] if m.material == *membrane_material => (m, 0.0),
            [m, a] if m.material == *membrane_material && a.material == Material::air() => {
                (m, a.thickness_nm)
            }
            _ => {
                return Err(Error::invalid(
                    "inner layers are not membrane followed by an optional air gap".to_string(),
                ))
            }
        };
        let bottom = LayerStack {
            incident_medium: stack.incident_medium.clone(),
            layers: stack.layers[..bottom_layer_count].to_vec(),
            exit_medium: membrane.material.clone(),
        }
        .reversed();
        let bottom = LayerStack { incident_medium: membrane.material.clone(), ..bottom };
        let top = LayerStack {
            incident_medium: Material::air(),
            layers: stack.layers[n - top_layer_count..].to_vec(),
            exit_medium: stack.exit_medium.clone(),
        };
        Ok(CavityAssembly {
            bottom_mirror: LayerStack { exit_medium: stack.incident_medium.clone(), ..bottom },
            bottom_orientation: MirrorOrientation::CavitySideFirst,
            membrane_material: membrane.material.clone(),
            membrane_thickness_nm: membrane.thickness_nm,
            air_gap_nm,
            top_mirror: top,
            top_orientation: MirrorOrientation::CavitySideFirst,
        })
    }

    /// Copy with a different air gap.
    pub fn with_air_gap(&self, air_gap_nm: f64) -> Self {
        CavityAssembly { air_gap_nm, ..self.clone() }
    }

    /// Copy with a different membrane thickness.
    pub fn with_membrane_thickness(&self, membrane_thickness_nm: f64) -> Self {
        CavityAssembly { membrane_thickness_nm, ..self.clone() }
    }
}

/// Build a quarter-wave distributed Bragg reflector.
///
/// Layers are ordered cavity-side first and alternate `high`, `low`, ...;
/// each thickness is `center_wavelength / (4 n)` so that every layer has
/// optical thickness exactly a quarter of the center wavelength. The total
/// layer count is `2 * pair_count`. The incident medium is air (the mirror
/// as characterized stand-alone); embed with
/// [`LayerStack::with_incident`] or [`assemble_cavity`] as needed.
pub fn build_quarter_wave_dbr(
    center_wavelength_nm: f64,
    pair_count: usize,
    high: Material,
    low: Material,
    exit: Material,
) -> Result<LayerStack> {
    if !center_wavelength_nm.is_finite() || center_wavelength_nm <= 0.0 {
        return Err(Error::invalid(format!(
            "center wavelength must be > 0, got {center_wavelength_nm}"
        )));
    }
    let mut layers = Vec::with_capacity(2 * pair_count);
    for _ in 0..pair_count {
        layers.push(Layer::new(high.clone(), center_wavelength_nm / (4.0 * high.refractive_index))?);
        layers.push(Layer::new(low.clone(), center_wavelength_nm / (4.0 * low.refractive_index))?);
    }
    Ok(LayerStack { incident_medium: Material::air(), layers, exit_medium: exit })
}

/// Assemble a membrane cavity from two mirrors given cavity-side first.
pub fn assemble_cavity(
    bottom: LayerStack,
    membrane: Material,
    membrane_thickness_nm: f64,
    air_gap_nm: f64,
    top: LayerStack,
) -> Result<CavityAssembly> {
    if !membrane_thickness_nm.is_finite() || membrane_thickness_nm <= 0.0 {
        return Err(Error::invalid(format!(
            "membrane thickness must be > 0, got {membrane_thickness_nm}"
        )));
    }
    if !air_gap_nm.is_finite() || air_gap_nm < 0.0 {
        return Err(Error::invalid(format!("air gap must be >= 0, got {air_gap_nm}")));
    }
    Ok(CavityAssembly {
        bottom_mirror: bottom,
        bottom_orientation: MirrorOrientation::CavitySideFirst,
        membrane_material: membrane,
        membrane_thickness_nm,
        air_gap_nm,
        top_mirror: top,
        top_orientation: MirrorOrientation::CavitySideFirst,
    })
}

/// The mirror pair and geometry of the experiment this crate reproduces:
/// a 15-pair bottom mirror centered at 625 nm carrying a 772 nm diamond
/// membrane, a 2596 nm air gap and a 14-pair top mirror centered at 629 nm.
pub fn reference_assembly() -> CavityAssembly {
    let bottom = build_quarter_wave_dbr(
        625.0,
        15,
        Material::tantala(),
        Material::silica(),
        Material::silica(),
    )
    .expect("valid mirror parameters");
    let top = build_quarter_wave_dbr(
        629.0,
        14,
        Material::tantala(),
        Material::silica(),
        Material::silica(),
    )
    .expect("valid mirror parameters");
    assemble_cavity(bottom, Material::diamond(), 772.0, 2596.0, top)
        .expect("valid reference geometry")
}

// ---------------------------------------------------------------------------
// Stack-definition documents
// ---------------------------------------------------------------------------

/// One entry of a stack document: either a literal layer or a "dbr" shorthand
/// that expands through [`build_quarter_wave_dbr`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayerEntry {
    Dbr {
        dbr: DbrSpec,
    },
    Literal {
        material: String,
        thickness_nm: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DbrSpec {
    pub center_nm: f64,
    pub pairs: usize,
    pub high: String,
    pub low: String,
}

/// JSON-compatible description of a [`LayerStack`]. Layer order in the
/// document is propagation order: the first entry is struck first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackDocument {
    pub incident: String,
    pub exit: String,
    pub materials: Vec<MaterialSpec>,
    pub layers: Vec<LayerEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    pub n: f64,
}

impl StackDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InputFormat(format!("stack document: {e}")))
    }

    fn material(&self, name: &str) -> Result<Material> {
        let spec = self
            .materials
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::InputFormat(format!("material '{name}' not declared")))?;
        Material::new(spec.name.clone(), spec.n)
    }

    /// Expand into a [`LayerStack`]; duplicate material names are rejected.
    pub fn build(&self) -> Result<LayerStack> {
        let mut seen = std::collections::HashSet::new();
        for m in &self.materials {
            if !seen.insert(m.name.as_str()) {
                return Err(Error::InputFormat(format!("duplicate material '{}'", m.name)));
            }
        }
        let incident = self.material(&self.incident)?;
        let exit = self.material(&self.exit)?;
        let mut layers = Vec::new();
        for entry in &self.layers {
            match entry {
                LayerEntry::Literal { material, thickness_nm } => {
                    layers.push(Layer::new(self.material(material)?, *thickness_nm)?);
                }
                LayerEntry::Dbr { dbr } => {
                    let expanded = build_quarter_wave_dbr(
                        dbr.center_nm,
                        dbr.pairs,
                        self.material(&dbr.high)?,
                        self.material(&dbr.low)?,
                        exit.clone(),
                    )?;
                    layers.extend(expanded.layers);
                }
            }
        }
        Ok(LayerStack { incident_medium: incident, layers, exit_medium: exit })
    }

    /// Document describing an existing stack (materials deduplicated).
    pub fn describe(stack: &LayerStack) -> Self {
        let mut materials: Vec<MaterialSpec> = Vec::new();
        let mut push = |m: &Material| {
            if !materials.iter().any(|s| s.name == m.name) {
                materials.push(MaterialSpec { name: m.name.clone(), n: m.refractive_index });
            }
        };
        push(&stack.incident_medium);
        push(&stack.exit_medium);
        for l in &stack.layers {
            push(&l.material);
        }
        StackDocument {
            incident: stack.incident_medium.name.clone(),
            exit: stack.exit_medium.name.clone(),
            materials,
            layers: stack
                .layers
                .iter()
                .map(|l| LayerEntry::Literal {
                    material: l.material.name.clone(),
                    thickness_nm: l.thickness_nm,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_wave_thicknesses_match_design() {
        let dbr = build_quarter_wave_dbr(
            625.0,
            15,
            Material::tantala(),
            Material::silica(),
            Material::silica(),
        )
        .unwrap();
        assert_eq!(dbr.layers.len(), 30);
        assert!((dbr.layers[0].thickness_nm - 74.052).abs() < 5e-3);
        assert!((dbr.layers[1].thickness_nm - 107.02).abs() < 5e-3);
        for layer in &dbr.layers {
            assert!((layer.optical_thickness_nm() - 625.0 / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn top_mirror_design() {
        let dbr = build_quarter_wave_dbr(
            629.0,
            14,
            Material::tantala(),
            Material::silica(),
            Material::silica(),
        )
        .unwrap();
        assert_eq!(dbr.layers.len(), 28);
        for layer in &dbr.layers {
            assert!((layer.optical_thickness_nm() - 629.0 / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_pairs_is_bare_interface() {
        let dbr = build_quarter_wave_dbr(
            625.0,
            0,
            Material::tantala(),
            Material::silica(),
            Material::silica(),
        )
        .unwrap();
        assert!(dbr.layers.is_empty());
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(build_quarter_wave_dbr(
            0.0,
            5,
            Material::tantala(),
            Material::silica(),
            Material::silica()
        )
        .is_err());
        assert!(Layer::new(Material::air(), -3.0).is_err());
        assert!(Material::new("vacuum-ish", 0.5).is_err());
    }

    #[test]
    fn flatten_counts_and_order() {
        let asm = reference_assembly();
        let flat = asm.flatten();
        // 30 bottom layers + membrane + air + 28 top layers
        assert_eq!(flat.layers.len(), 60);
        assert_eq!(flat.layers[29].material.name, "Ta2O5"); // last bottom layer faces membrane
        assert_eq!(flat.layers[30].material, Material::diamond());
        assert_eq!(flat.layers[31].material, Material::air());
        assert_eq!(flat.layers[32].material.name, "Ta2O5"); // top mirror cavity side
        assert_eq!(flat.incident_medium.name, "SiO2");
        assert_eq!(flat.exit_medium.name, "SiO2");
    }

    #[test]
    fn flatten_zero_gap_omits_air() {
        let asm = reference_assembly().with_air_gap(0.0);
        let flat = asm.flatten();
        assert_eq!(flat.layers.len(), 59);
        assert_eq!(flat.layers[30].material, Material::diamond());
        assert_eq!(flat.layers[31].material.name, "Ta2O5");
    }

    #[test]
    fn orientation_field_controls_flattening() {
        let asm = reference_assembly();
        // storing the bottom mirror substrate-side first must describe the
        // same physical structure
        let mut flipped = asm.clone();
        flipped.bottom_mirror = asm.bottom_mirror.reversed();
        flipped.bottom_orientation = MirrorOrientation::SubstrateSideFirst;
        assert_eq!(flipped.flatten(), asm.flatten());

        let mut flipped_top = asm.clone();
        flipped_top.top_mirror = asm.top_mirror.reversed();
        flipped_top.top_orientation = MirrorOrientation::SubstrateSideFirst;
        assert_eq!(flipped_top.flatten(), asm.flatten());
    }

    #[test]
    fn flatten_round_trips() {
        let asm = reference_assembly();
        let flat = asm.flatten();
        let back = CavityAssembly::from_flattened(&flat, 30, 28, &Material::diamond()).unwrap();
        assert_eq!(back.membrane_thickness_nm, asm.membrane_thickness_nm);
        assert_eq!(back.air_gap_nm, asm.air_gap_nm);
        assert_eq!(back.bottom_mirror.layers, asm.bottom_mirror.layers);
        assert_eq!(back.top_mirror.layers, asm.top_mirror.layers);
        assert_eq!(back.flatten(), flat);
    }

    #[test]
    fn document_round_trip_and_dbr_shorthand() {
        let text = r#"{
            "incident": "air",
            "exit": "SiO2",
            "materials": [
                {"name": "air", "n": 1.0},
                {"name": "SiO2", "n": 1.46},
                {"name": "Ta2O5", "n": 2.11}
            ],
            "layers": [
                {"dbr": {"center_nm": 625.0, "pairs": 15, "high": "Ta2O5", "low": "SiO2"}}
            ]
        }"#;
        let doc = StackDocument::parse(text).unwrap();
        let stack = doc.build().unwrap();
        assert_eq!(stack.layers.len(), 30);
        let direct = build_quarter_wave_dbr(
            625.0,
            15,
            Material::tantala(),
            Material::silica(),
            Material::silica(),
        )
        .unwrap();
        assert_eq!(stack.layers, direct.layers);

        let described = StackDocument::describe(&stack);
        let rebuilt = described.build().unwrap();
        assert_eq!(rebuilt, stack);
    }

    #[test]
    fn document_rejects_unknown_material() {
        let text = r#"{
            "incident": "air", "exit": "glass",
            "materials": [{"name": "air", "n": 1.0}],
            "layers": []
        }"#;
        let doc = StackDocument::parse(text).unwrap();
        assert!(matches!(doc.build(), Err(Error::InputFormat(_))));
    }
}
