//! Simulation configuration: material and dot parameters, time grid,
//! quadrature controls, and the TOML schema used by every CLI tool.
//!
//! The schema is a flat key/value document with nested sections. Every key
//! is optional; an empty document is exactly [`default_gaas`]. Unknown keys
//! are rejected so typos fail loudly. The grammar is frozen by the golden
//! file under `tests/golden/`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{dimension_audit, KG_PER_M3_TO_INTERNAL};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unsupported schema_version {found} (this build reads {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Deformation-potential material parameters.
///
/// The bosonic normalisation volume V never appears here: it cancels
/// analytically against the 1/V inside the squared coupling, so all
/// coupling quantities downstream are the volume-free combination f²V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialParams {
    /// Electron deformation potential, meV.
    pub sigma_e_mev: f64,
    /// Hole deformation potential, meV.
    pub sigma_h_mev: f64,
    /// Longitudinal sound speed, nm/ps.
    pub sound_speed_nm_ps: f64,
    /// Crystal density, kg/m³ (converted internally, see [`Self::density_internal`]).
    pub density_kg_m3: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        // GaAs bulk with InGaAs dot couplings: σ_e = 8 eV, σ_h = −1 eV,
        // c = 5.1 nm/ps, ϱ = 5360 kg/m³.
        Self {
            sigma_e_mev: 8000.0,
            sigma_h_mev: -1000.0,
            sound_speed_nm_ps: 5.1,
            density_kg_m3: 5360.0,
        }
    }
}

impl MaterialParams {
    /// Density in internal units, meV·ps²·nm⁻⁵.
    pub fn density_internal(&self) -> f64 {
        self.density_kg_m3 * KG_PER_M3_TO_INTERNAL
    }
}

/// Dot geometry: anisotropic Gaussian wave-function extensions and the
/// inter-dot distance along the growth axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DotGeometry {
    /// Inter-dot distance, nm.
    pub dot_separation_nm: f64,
    /// Electron in-plane extension, nm.
    pub electron_extent_nm: f64,
    /// Hole in-plane extension, nm.
    pub hole_extent_nm: f64,
    /// Common z extension, nm.
    pub z_extent_nm: f64,
}

impl Default for DotGeometry {
    fn default() -> Self {
        Self {
            dot_separation_nm: 6.0,
            electron_extent_nm: 4.4,
            hole_extent_nm: 3.6,
            z_extent_nm: 1.0,
        }
    }
}

/// Uniform time grid, ps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGrid {
    pub start_ps: f64,
    pub stop_ps: f64,
    pub step_ps: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            start_ps: 0.0,
            stop_ps: 5.0,
            step_ps: 0.01,
        }
    }
}

impl TimeGrid {
    /// Sample points, inclusive of both ends (the last step may be short).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_ps - self.start_ps) / self.step_ps).round() as usize;
        let mut ts: Vec<f64> = (0..=n).map(|i| self.start_ps + i as f64 * self.step_ps).collect();
        if let Some(last) = ts.last_mut() {
            if *last > self.stop_ps {
                *last = self.stop_ps;
            }
        }
        ts
    }
}

/// Momentum-space quadrature controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Node floor for the in-plane axis.
    pub perp_nodes: usize,
    /// Node floor for the z axis.
    pub z_nodes: usize,
    /// Momentum cutoff as a multiple of 1/min(l_e, l_h, l_z).
    pub cutoff_multiplier: f64,
    /// Nodes per cos(ωt) oscillation when scaling counts with the horizon.
    pub nodes_per_cycle: f64,
    /// Relative tolerance for the grid-doubling convergence check.
    pub convergence_rel_tol: f64,
    /// Run the grid-doubling check inside profile construction.
    pub check_convergence: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            perp_nodes: 128,
            z_nodes: 128,
            cutoff_multiplier: 8.0,
            nodes_per_cycle: 8.0,
            convergence_rel_tol: 1e-6,
            check_convergence: true,
        }
    }
}

/// Full simulation configuration. Immutable after construction; share it
/// read-only across workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub schema_version: u32,
    pub material: MaterialParams,
    pub geometry: DotGeometry,
    pub time_grid: TimeGrid,
    /// Temperatures to scan, K.
    pub temperatures_k: Vec<f64>,
    pub quadrature: QuadratureConfig,
    /// Transition-energy detuning ε₁−ε₂, meV. Zero keeps the (01,10)
    /// coherence real under dephasing.
    pub detuning_mev: f64,
    /// Include the phonon-induced phase of the exact dephasing exponent.
    pub include_phonon_phase: bool,
    /// Base seed for every stochastic component (minimizer restarts, state
    /// sampling). Scan cells derive per-cell seeds from it.
    pub rng_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            material: MaterialParams::default(),
            geometry: DotGeometry::default(),
            time_grid: TimeGrid::default(),
            temperatures_k: vec![1.0, 10.0, 40.0, 100.0],
            quadrature: QuadratureConfig::default(),
            detuning_mev: 0.0,
            include_phonon_phase: false,
            rng_seed: 1,
        }
    }
}

/// Default parameter set: two stacked self-assembled GaAs/InGaAs dots.
pub fn default_gaas() -> SimulationConfig {
    SimulationConfig::default()
}

impl SimulationConfig {
    /// Check every invariant. Returns non-fatal warnings on success.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion {
                found: self.schema_version,
            });
        }
        dimension_audit().map_err(|e| invalid("units", e))?;

        let m = &self.material;
        if !(m.sound_speed_nm_ps > 0.0) {
            return Err(invalid(
                "material.sound_speed_nm_ps",
                format!("must be > 0, got {}", m.sound_speed_nm_ps),
            ));
        }
        if !(m.density_kg_m3 > 0.0) {
            return Err(invalid(
                "material.density_kg_m3",
                format!("must be > 0, got {}", m.density_kg_m3),
            ));
        }

        let g = &self.geometry;
        for (field, v) in [
            ("geometry.dot_separation_nm", g.dot_separation_nm),
            ("geometry.electron_extent_nm", g.electron_extent_nm),
            ("geometry.hole_extent_nm", g.hole_extent_nm),
            ("geometry.z_extent_nm", g.z_extent_nm),
        ] {
            if !(v > 0.0) {
                return Err(invalid_static(field, format!("must be > 0, got {v}")));
            }
        }

        let t = &self.time_grid;
        if !(t.step_ps > 0.0) {
            return Err(invalid(
                "time_grid.step_ps",
                format!("must be > 0, got {}", t.step_ps),
            ));
        }
        if t.start_ps < 0.0 {
            return Err(invalid(
                "time_grid.start_ps",
                format!("must be >= 0, got {}", t.start_ps),
            ));
        }
        if t.stop_ps < t.start_ps {
            return Err(invalid(
                "time_grid.stop_ps",
                format!("must be >= start_ps, got {}", t.stop_ps),
            ));
        }

        if self.temperatures_k.is_empty() {
            return Err(invalid("temperatures_k", "must not be empty"));
        }
        for &temp in &self.temperatures_k {
            if temp < 0.0 || !temp.is_finite() {
                return Err(invalid(
                    "temperatures_k",
                    format!("temperatures must be >= 0, got {temp}"),
                ));
            }
        }

        let q = &self.quadrature;
        if q.perp_nodes < 16 {
            return Err(invalid(
                "quadrature.perp_nodes",
                format!("must be >= 16, got {}", q.perp_nodes),
            ));
        }
        if q.z_nodes < 16 {
            return Err(invalid(
                "quadrature.z_nodes",
                format!("must be >= 16, got {}", q.z_nodes),
            ));
        }
        if !(q.cutoff_multiplier >= 5.0) {
            return Err(invalid(
                "quadrature.cutoff_multiplier",
                format!("must be >= 5, got {}", q.cutoff_multiplier),
            ));
        }
        if !(q.nodes_per_cycle > 0.0) {
            return Err(invalid(
                "quadrature.nodes_per_cycle",
                format!("must be > 0, got {}", q.nodes_per_cycle),
            ));
        }
        if !(q.convergence_rel_tol > 0.0) {
            return Err(invalid(
                "quadrature.convergence_rel_tol",
                format!("must be > 0, got {}", q.convergence_rel_tol),
            ));
        }

        let mut warnings = Vec::new();
        if m.sigma_e_mev == m.sigma_h_mev {
            warnings.push(
                "material: sigma_e == sigma_h makes the k_perp -> 0 coupling bracket vanish \
                 identically; the deformation-potential channel is degenerate"
                    .to_string(),
            );
        }
        Ok(warnings)
    }
}

fn invalid_static(field: &'static str, reason: String) -> ConfigError {
    ConfigError::Invalid { field, reason }
}

/// Parse a TOML document, fill defaults for omitted keys, and validate.
pub fn load_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let cfg: SimulationConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Serialize a configuration in the documented schema.
pub fn save_config(cfg: &SimulationConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serialization cannot fail")
}
