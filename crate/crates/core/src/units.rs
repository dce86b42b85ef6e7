//! Physical constants and the internal unit system.
//!
//! Everything downstream works in (meV, nm, ps, K). Energies quoted in eV
//! are converted at the configuration boundary; the crystal mass density is
//! converted from kg/m³ once, through [`KG_PER_M3_TO_INTERNAL`], so that no
//! SI quantity leaks into the integrals. In these units the dephasing
//! exponents come out O(1) and the Gaussian form factors stay far away from
//! f64 underflow.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant, meV·ps (CODATA).
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Boltzmann constant, meV/K (CODATA).
pub const KB_MEV_PER_K: f64 = 0.0861733326;

/// 1 J expressed in meV (from the exact SI elementary charge).
pub const MEV_PER_JOULE: f64 = 6.241509074460763e21;

/// 1 kg/m³ = 1 J·s²·m⁻⁵ expressed in meV·ps²·nm⁻⁵.
///
/// meV/J · (ps/s)² · (nm/m)⁻⁵ = 6.241509…e21 · 1e24 · 1e-45.
pub const KG_PER_M3_TO_INTERNAL: f64 = MEV_PER_JOULE * 1e24 * 1e-45;

/// Fixed constants bundle; see the module docs for the unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// ħ in meV·ps.
    pub hbar_mev_ps: f64,
    /// k_B in meV/K.
    pub kb_mev_per_k: f64,
    /// Conversion factor kg/m³ → meV·ps²·nm⁻⁵.
    pub kg_per_m3_to_internal: f64,
}

impl PhysicalConstants {
    pub const fn codata() -> Self {
        Self {
            hbar_mev_ps: HBAR_MEV_PS,
            kb_mev_per_k: KB_MEV_PER_K,
            kg_per_m3_to_internal: KG_PER_M3_TO_INTERNAL,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// Dimension exponents over the internal base units (meV, nm, ps, K).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dim {
    pub mev: i32,
    pub nm: i32,
    pub ps: i32,
    pub kelvin: i32,
}

impl Dim {
    pub const DIMENSIONLESS: Dim = Dim::new(0, 0, 0, 0);
    pub const ENERGY: Dim = Dim::new(1, 0, 0, 0);
    pub const WAVENUMBER: Dim = Dim::new(0, -1, 0, 0);
    pub const TIME: Dim = Dim::new(0, 0, 1, 0);
    pub const TEMPERATURE: Dim = Dim::new(0, 0, 0, 1);
    /// ħ: energy·time.
    pub const ACTION: Dim = Dim::new(1, 0, 1, 0);
    /// k_B: energy/temperature.
    pub const ENTROPY: Dim = Dim::new(1, 0, 0, -1);
    /// Sound speed: nm/ps.
    pub const VELOCITY: Dim = Dim::new(0, 1, -1, 0);
    /// Mass density in internal units: meV·ps²·nm⁻⁵.
    pub const MASS_DENSITY: Dim = Dim::new(1, -5, 2, 0);

    pub const fn new(mev: i32, nm: i32, ps: i32, kelvin: i32) -> Self {
        Self { mev, nm, ps, kelvin }
    }

    pub const fn mul(self, other: Dim) -> Dim {
        Dim::new(
            self.mev + other.mev,
            self.nm + other.nm,
            self.ps + other.ps,
            self.kelvin + other.kelvin,
        )
    }

    pub const fn div(self, other: Dim) -> Dim {
        Dim::new(
            self.mev - other.mev,
            self.nm - other.nm,
            self.ps - other.ps,
            self.kelvin - other.kelvin,
        )
    }

    pub const fn pow(self, n: i32) -> Dim {
        Dim::new(self.mev * n, self.nm * n, self.ps * n, self.kelvin * n)
    }

    pub const fn is_dimensionless(self) -> bool {
        self.mev == 0 && self.nm == 0 && self.ps == 0 && self.kelvin == 0
    }
}

/// Startup dimensional audit of the dephasing-exponent integrand.
///
/// Checks that
///   [ħ σ² k / (2ϱc)] / (ħ c k)² · d³k   (the coupling weight over (ħω)²),
///   ħck / (k_B T)                        (the coth argument), and
///   c k t                                (the oscillatory phase)
/// are all dimensionless in the internal unit system. A wrong mass-density
/// conversion or a misplaced ħ shows up here before it can corrupt Γ.
pub fn dimension_audit() -> Result<(), String> {
    let sigma = Dim::ENERGY;
    let k = Dim::WAVENUMBER;
    let coupling_sq_vol = Dim::ACTION
        .mul(sigma.pow(2))
        .mul(k)
        .div(Dim::MASS_DENSITY.mul(Dim::VELOCITY)); // ħσ²k/(ϱc) = f²V
    let hbar_omega = Dim::ACTION.mul(Dim::VELOCITY).mul(k);
    let d3k = k.pow(3);

    let gamma_integrand = coupling_sq_vol.div(hbar_omega.pow(2)).mul(d3k);
    if !gamma_integrand.is_dimensionless() {
        return Err(format!(
            "dephasing integrand is not dimensionless: {gamma_integrand:?}"
        ));
    }

    let coth_arg = hbar_omega.div(Dim::ENTROPY.mul(Dim::TEMPERATURE));
    if !coth_arg.is_dimensionless() {
        return Err(format!("coth argument is not dimensionless: {coth_arg:?}"));
    }

    let phase = Dim::VELOCITY.mul(k).mul(Dim::TIME);
    if !phase.is_dimensionless() {
        return Err(format!("oscillatory phase is not dimensionless: {phase:?}"));
    }

    Ok(())
}
