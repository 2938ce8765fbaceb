//! Execution context: resolved defaults and output-directory handling.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use fpcav_core::stack::{assemble_cavity, build_quarter_wave_dbr, CavityAssembly, Material};

use crate::error::{CliError, CliResult};

/// Copy of the shipped defaults, used when no file is found on disk.
const EMBEDDED_DEFAULTS: &str = include_str!("../../../defaults.toml");

/// Environment variable overriding the defaults-file path.
pub const DEFAULTS_ENV: &str = "FPCAV_DEFAULTS";

#[derive(Debug, Clone, Deserialize)]
pub struct Defaults {
    pub materials: MaterialDefaults,
    pub mirrors: MirrorDefaults,
    pub geometry: GeometryDefaults,
    pub raman: RamanDefaults,
    pub detection: DetectionDefaults,
    pub budget: BudgetDefaults,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MaterialDefaults {
    pub n_silica: f64,
    pub n_tantala: f64,
    pub n_diamond: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MirrorDefaults {
    pub bottom_center_nm: f64,
    pub bottom_pairs: usize,
    pub top_center_nm: f64,
    pub top_pairs: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GeometryDefaults {
    pub membrane_thickness_nm: f64,
    pub air_gap_nm: f64,
    pub mirror_radius_um: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RamanDefaults {
    pub shift_inv_cm: f64,
    pub pump_nm: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DetectionDefaults {
    pub na_collection: f64,
    pub na_confocal: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BudgetDefaults {
    pub lambda_s_nm: f64,
    pub q_cavity: f64,
    pub stokes_fwhm_pm: f64,
    pub w_intensity_um: f64,
    pub averaging: f64,
    pub measured_enhancement: f64,
}

impl Defaults {
    /// Load from an explicit path, the environment override, a defaults.toml
    /// next to the working directory, or the embedded copy, in that order.
    pub fn load(explicit: Option<&Path>) -> CliResult<Self> {
        let candidate = explicit
            .map(PathBuf::from)
            .or_else(|| std::env::var_os(DEFAULTS_ENV).map(PathBuf::from));
        let text = match candidate {
            Some(path) => std::fs::read_to_string(&path).map_err(|e| {
                CliError::Input(format!("defaults file {}: {e}", path.display()))
            })?,
            None => {
                let local = Path::new("defaults.toml");
                if local.exists() {
                    std::fs::read_to_string(local)
                        .map_err(|e| CliError::Input(format!("defaults.toml: {e}")))?
                } else {
                    EMBEDDED_DEFAULTS.to_string()
                }
            }
        };
        toml::from_str(&text).map_err(|e| CliError::Input(format!("defaults file: {e}")))
    }

    fn bad(field: &str, e: fpcav_core::Error) -> CliError {
        CliError::Input(format!("defaults file: {field}: {e}"))
    }

    pub fn silica(&self) -> CliResult<Material> {
        Material::new("SiO2", self.materials.n_silica).map_err(|e| Self::bad("n_silica", e))
    }

    pub fn tantala(&self) -> CliResult<Material> {
        Material::new("Ta2O5", self.materials.n_tantala).map_err(|e| Self::bad("n_tantala", e))
    }

    pub fn diamond(&self) -> CliResult<Material> {
        Material::new("diamond", self.materials.n_diamond).map_err(|e| Self::bad("n_diamond", e))
    }

    pub fn bottom_mirror(&self) -> CliResult<fpcav_core::stack::LayerStack> {
        build_quarter_wave_dbr(
            self.mirrors.bottom_center_nm,
            self.mirrors.bottom_pairs,
            self.tantala()?,
            self.silica()?,
            self.silica()?,
        )
        .map_err(|e| Self::bad("mirrors", e))
    }

    pub fn top_mirror(&self) -> CliResult<fpcav_core::stack::LayerStack> {
        build_quarter_wave_dbr(
            self.mirrors.top_center_nm,
            self.mirrors.top_pairs,
            self.tantala()?,
            self.silica()?,
            self.silica()?,
        )
        .map_err(|e| Self::bad("mirrors", e))
    }

    /// The reference cavity assembly described by the defaults.
    pub fn assembly(&self) -> CliResult<CavityAssembly> {
        assemble_cavity(
            self.bottom_mirror()?,
            self.diamond()?,
            self.geometry.membrane_thickness_nm,
            self.geometry.air_gap_nm,
            self.top_mirror()?,
        )
        .map_err(|e| Self::bad("geometry", e))
    }
}

/// Shared command environment.
pub struct Context {
    pub defaults: Defaults,
    pub out_dir: PathBuf,
}

impl Context {
    pub fn write_artifact(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)?;
        Ok(path)
    }
}
