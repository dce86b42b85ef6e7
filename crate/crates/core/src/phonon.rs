//! Exciton–phonon coupling and the pure-dephasing exponents Γ(t, T).
//!
//! The deformation-potential coupling to longitudinal acoustic phonons of a
//! dot at z = ±d/2 is f_k e^{±i k_z d/2} with the volume-free square
//!
//! ```text
//! f²V = (ħ k / 2ϱc) e^{-l_z² k_z² / 2} [σ_e e^{-l_e² k⊥²/4} − σ_h e^{-l_h² k⊥²/4}]²
//! ```
//!
//! Exact diagonalisation by displacement operators gives, for the coherence
//! between basis states μ and ν with total couplings g^μ_k, g^ν_k,
//!
//! ```text
//! Γ_{μν}(t,T) = (2π)⁻³ ∫d³k |g^μ−g^ν|²V (ħω)⁻² (1 − cos ωt) coth(ħω/2k_BT)
//! ```
//!
//! with ω = c|k| and coth → 1 at T = 0, plus a temperature-independent
//! phase (polaron-shift terms drop out: they only renormalise the
//! transition energies that the detuning setting controls):
//!
//! ```text
//! φ_{μν}(t) = (2π)⁻³ ∫d³k [(|g^ν|²−|g^μ|²) sin ωt + 2 Im(g^μ g^{ν*})(1 − cos ωt)] V(ħω)⁻²
//! ```
//!
//! Both are evaluated on a tensor Gauss–Legendre grid in cylindrical
//! coordinates. The Γ integrand is even in k_z and runs on the doubled
//! half-range; the phase integrand has an odd cross term and runs on the
//! mirrored full range, so its (01,10) cancellation is produced by the
//! quadrature rather than assumed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{DotGeometry, MaterialParams, SimulationConfig};
use crate::quad::SpectralGrid;
use crate::units::{HBAR_MEV_PS, KB_MEV_PER_K};

#[derive(Debug, Error)]
pub enum PhononError {
    #[error("bad spectral grid: {0}")]
    BadGrid(String),
    #[error(
        "quadrature not converged: pair {pair} at t = {t_ps} ps changes by {rel:.3e} (> {tol:.1e}) under grid doubling"
    )]
    NonConvergence {
        pair: &'static str,
        t_ps: f64,
        rel: f64,
        tol: f64,
    },
}

/// The six unordered coherence pairs of the product basis, in row-major
/// upper-triangle order of the density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoherencePair {
    /// (00,01) — accessor u
    B00B01,
    /// (00,10) — accessor v
    B00B10,
    /// (00,11) — accessor g
    B00B11,
    /// (01,10) — accessor h
    B01B10,
    /// (01,11) — accessor p
    B01B11,
    /// (10,11) — accessor q
    B10B11,
}

impl CoherencePair {
    pub const ALL: [CoherencePair; 6] = [
        CoherencePair::B00B01,
        CoherencePair::B00B10,
        CoherencePair::B00B11,
        CoherencePair::B01B10,
        CoherencePair::B01B11,
        CoherencePair::B10B11,
    ];

    /// (row, col) of the upper-triangle matrix entry this pair decays.
    pub fn indices(self) -> (usize, usize) {
        match self {
            CoherencePair::B00B01 => (0, 1),
            CoherencePair::B00B10 => (0, 2),
            CoherencePair::B00B11 => (0, 3),
            CoherencePair::B01B10 => (1, 2),
            CoherencePair::B01B11 => (1, 3),
            CoherencePair::B10B11 => (2, 3),
        }
    }

    pub fn index(self) -> usize {
        match self {
            CoherencePair::B00B01 => 0,
            CoherencePair::B00B10 => 1,
            CoherencePair::B00B11 => 2,
            CoherencePair::B01B10 => 3,
            CoherencePair::B01B11 => 4,
            CoherencePair::B10B11 => 5,
        }
    }

    /// CSV label, frozen.
    pub fn label(self) -> &'static str {
        match self {
            CoherencePair::B00B01 => "00-01",
            CoherencePair::B00B10 => "00-10",
            CoherencePair::B00B11 => "00-11",
            CoherencePair::B01B10 => "01-10",
            CoherencePair::B01B11 => "01-11",
            CoherencePair::B10B11 => "10-11",
        }
    }

    fn gamma_class(self) -> GammaClass {
        match self {
            CoherencePair::B00B11 => GammaClass::DoubleExciton,
            CoherencePair::B01B10 => GammaClass::ExcitonSwap,
            _ => GammaClass::Single,
        }
    }
}

impl std::fmt::Display for CoherencePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Coupling-difference classes: the four single-coherence pairs share one
/// weight; (01,10) carries 4 sin²(k_z d/2); (00,11) carries 4 cos²(k_z d/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GammaClass {
    Single,
    ExcitonSwap,
    DoubleExciton,
}

const GAMMA_CLASSES: [GammaClass; 3] = [
    GammaClass::Single,
    GammaClass::ExcitonSwap,
    GammaClass::DoubleExciton,
];

/// Material + geometry bundle with the coupling formulas.
#[derive(Debug, Clone)]
pub struct ExcitonPhononCoupling {
    sigma_e: f64,
    sigma_h: f64,
    c_sound: f64,
    rho_internal: f64,
    d_sep: f64,
    l_e: f64,
    l_h: f64,
    l_z: f64,
}

impl ExcitonPhononCoupling {
    pub fn new(material: &MaterialParams, geometry: &DotGeometry) -> Self {
        Self {
            sigma_e: material.sigma_e_mev,
            sigma_h: material.sigma_h_mev,
            c_sound: material.sound_speed_nm_ps,
            rho_internal: material.density_internal(),
            d_sep: geometry.dot_separation_nm,
            l_e: geometry.electron_extent_nm,
            l_h: geometry.hole_extent_nm,
            l_z: geometry.z_extent_nm,
        }
    }

    pub fn from_config(cfg: &SimulationConfig) -> Self {
        Self::new(&cfg.material, &cfg.geometry)
    }

    pub fn sound_speed(&self) -> f64 {
        self.c_sound
    }

    pub fn dot_separation(&self) -> f64 {
        self.d_sep
    }

    /// Volume-free squared form factor f²V in meV²·nm³.
    pub fn form_factor_sq(&self, k_perp: f64, k_z: f64) -> f64 {
        debug_assert!(k_perp >= 0.0);
        let k = k_perp.hypot(k_z);
        let bracket = self.sigma_e * (-self.l_e * self.l_e * k_perp * k_perp / 4.0).exp()
            - self.sigma_h * (-self.l_h * self.l_h * k_perp * k_perp / 4.0).exp();
        HBAR_MEV_PS * k / (2.0 * self.rho_internal * self.c_sound)
            * (-self.l_z * self.l_z * k_z * k_z / 2.0).exp()
            * bracket
            * bracket
    }

    /// Squared coupling difference |g^μ − g^ν|²V for a coherence pair.
    pub fn pair_weight(&self, pair: CoherencePair, k_perp: f64, k_z: f64) -> f64 {
        self.form_factor_sq(k_perp, k_z) * self.class_factor(pair.gamma_class(), k_z)
    }

    fn class_factor(&self, class: GammaClass, k_z: f64) -> f64 {
        match class {
            GammaClass::Single => 1.0,
            GammaClass::ExcitonSwap => {
                let s = (k_z * self.d_sep / 2.0).sin();
                4.0 * s * s
            }
            GammaClass::DoubleExciton => {
                let c = (k_z * self.d_sep / 2.0).cos();
                4.0 * c * c
            }
        }
    }

    /// Γ_{μν}(t, T) on the given grid. Pure; total on t ≥ 0, T ≥ 0.
    pub fn dephasing_exponent(
        &self,
        pair: CoherencePair,
        t_ps: f64,
        temperature_k: f64,
        grid: &SpectralGrid,
    ) -> f64 {
        assert!(t_ps >= 0.0, "time must be non-negative");
        assert!(temperature_k >= 0.0, "temperature must be non-negative");
        self.gamma_table(pair.gamma_class(), temperature_k, grid)
            .eval(t_ps)
    }

    /// Variant that re-evaluates on the doubled grid and flags
    /// non-convergence beyond `rel_tol`.
    pub fn dephasing_exponent_checked(
        &self,
        pair: CoherencePair,
        t_ps: f64,
        temperature_k: f64,
        grid: &SpectralGrid,
        rel_tol: f64,
    ) -> Result<f64, PhononError> {
        let coarse = self.dephasing_exponent(pair, t_ps, temperature_k, grid);
        let fine = self.dephasing_exponent(pair, t_ps, temperature_k, &grid.doubled());
        let rel = (coarse - fine).abs() / fine.abs().max(coarse.abs()).max(1e-14);
        if rel > rel_tol {
            return Err(PhononError::NonConvergence {
                pair: pair.label(),
                t_ps,
                rel,
                tol: rel_tol,
            });
        }
        Ok(coarse)
    }

    /// Imaginary part of the exact dephasing exponent (polaron-shift terms
    /// excluded), radians. Temperature does not enter.
    ///
    /// For (01,10) the surviving term is the odd-in-k_z cross term, so the
    /// mirrored quadrature returns zero up to rounding; that cancellation is
    /// a correctness check on the whole phase machinery.
    pub fn phase_exponent(&self, pair: CoherencePair, t_ps: f64, grid: &SpectralGrid) -> f64 {
        assert!(t_ps >= 0.0, "time must be non-negative");
        self.phase_table(pair, grid).eval(t_ps)
    }

    /// Decay table: Γ(t) = Σ_n coeff_n · (1 − cos(ω_n t)).
    fn gamma_table(&self, class: GammaClass, temperature_k: f64, grid: &SpectralGrid) -> GammaTable {
        let n = grid.k_perp_nodes.len() * grid.k_z_nodes.len();
        let mut omega = Vec::with_capacity(n);
        let mut coeff = Vec::with_capacity(n);
        // 2 (k_z evenness) * 2π (azimuth) / (2π)³
        let norm = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
        for (i, &kp) in grid.k_perp_nodes.iter().enumerate() {
            let wp = grid.k_perp_weights[i];
            for (j, &kz) in grid.k_z_nodes.iter().enumerate() {
                let wz = grid.k_z_weights[j];
                let k = kp.hypot(kz);
                let om = self.c_sound * k;
                let hbar_omega = HBAR_MEV_PS * om;
                let weight = self.form_factor_sq(kp, kz) * self.class_factor(class, kz);
                let therm = coth_thermal(hbar_omega, temperature_k);
                omega.push(om);
                coeff.push(norm * wp * wz * kp * weight * therm / (hbar_omega * hbar_omega));
            }
        }
        GammaTable { omega, coeff }
    }

    /// Phase table over the mirrored (±k_z) grid:
    /// φ(t) = Σ_n [s_n sin(ω_n t) + x_n (1 − cos(ω_n t))].
    fn phase_table(&self, pair: CoherencePair, grid: &SpectralGrid) -> PhaseTable {
        let n = 2 * grid.k_perp_nodes.len() * grid.k_z_nodes.len();
        let mut omega = Vec::with_capacity(n);
        let mut sin_coeff = Vec::with_capacity(n);
        let mut cross_coeff = Vec::with_capacity(n);
        // 2π (azimuth) / (2π)³, full k_z range
        let norm = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
        for (i, &kp) in grid.k_perp_nodes.iter().enumerate() {
            let wp = grid.k_perp_weights[i];
            for (j, &kz_abs) in grid.k_z_nodes.iter().enumerate() {
                let wz = grid.k_z_weights[j];
                for sign in [1.0, -1.0] {
                    let kz = sign * kz_abs;
                    let k = kp.hypot(kz);
                    let om = self.c_sound * k;
                    let hbar_omega = HBAR_MEV_PS * om;
                    let f2v = self.form_factor_sq(kp, kz);
                    let theta2 = (kz * self.d_sep / 2.0).cos();
                    let four_cos_sq = 4.0 * theta2 * theta2;
                    // |g^ν|² − |g^μ|² in units of f²V
                    let sin_factor = match pair {
                        CoherencePair::B00B01 | CoherencePair::B00B10 => 1.0,
                        CoherencePair::B00B11 => four_cos_sq,
                        CoherencePair::B01B10 => 0.0,
                        CoherencePair::B01B11 | CoherencePair::B10B11 => four_cos_sq - 1.0,
                    };
                    // 2 Im(g^μ g^{ν*}) in units of f²V; odd in k_z
                    let cross_factor = match pair {
                        CoherencePair::B00B01
                        | CoherencePair::B00B10
                        | CoherencePair::B00B11 => 0.0,
                        CoherencePair::B01B10 | CoherencePair::B01B11 => {
                            -2.0 * (kz * self.d_sep).sin()
                        }
                        CoherencePair::B10B11 => 2.0 * (kz * self.d_sep).sin(),
                    };
                    let base = norm * wp * wz * kp * f2v / (hbar_omega * hbar_omega);
                    omega.push(om);
                    sin_coeff.push(base * sin_factor);
                    cross_coeff.push(base * cross_factor);
                }
            }
        }
        PhaseTable {
            omega,
            sin_coeff,
            cross_coeff,
        }
    }
}

/// coth(ħω / 2k_BT), with the T = 0 limit 1. Stable for small arguments via
/// expm1; saturates to 1 for large ones.
fn coth_thermal(hbar_omega_mev: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        return 1.0;
    }
    let x = hbar_omega_mev / (KB_MEV_PER_K * temperature_k);
    // coth(x/2) = 1 + 2/(e^x - 1)
    let e = x.exp_m1();
    if e.is_infinite() {
        1.0
    } else {
        1.0 + 2.0 / e
    }
}

struct GammaTable {
    omega: Vec<f64>,
    coeff: Vec<f64>,
}

impl GammaTable {
    fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (om, c) in self.omega.iter().zip(&self.coeff) {
            let s = (om * t / 2.0).sin();
            acc += c * 2.0 * s * s;
        }
        acc
    }
}

struct PhaseTable {
    omega: Vec<f64>,
    sin_coeff: Vec<f64>,
    cross_coeff: Vec<f64>,
}

impl PhaseTable {
    fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for ((om, sc), xc) in self.omega.iter().zip(&self.sin_coeff).zip(&self.cross_coeff) {
            let s_half = (om * t / 2.0).sin();
            acc += sc * (om * t).sin() + xc * 2.0 * s_half * s_half;
        }
        acc
    }
}

/// Sampled decoherence exponents for all six pairs at one temperature.
#[derive(Debug, Clone)]
pub struct DephasingProfile {
    pub temperature_k: f64,
    pub times_ps: Vec<f64>,
    /// Γ curves indexed by [`CoherencePair::index`].
    pub gamma: [Vec<f64>; 6],
    /// Phonon phases, present when the configuration enables them.
    pub phase: Option<[Vec<f64>; 6]>,
    /// Deterministic detuning ε₁−ε₂ carried along for the channel, meV.
    pub detuning_mev: f64,
}

impl DephasingProfile {
    pub fn gamma_at(&self, pair: CoherencePair, t_ps: f64) -> Option<f64> {
        interp(&self.times_ps, &self.gamma[pair.index()], t_ps)
    }

    pub fn phase_at(&self, pair: CoherencePair, t_ps: f64) -> Option<f64> {
        match &self.phase {
            Some(phase) => interp(&self.times_ps, &phase[pair.index()], t_ps),
            None => Some(0.0),
        }
    }

    pub fn time_span(&self) -> (f64, f64) {
        (
            *self.times_ps.first().unwrap_or(&0.0),
            *self.times_ps.last().unwrap_or(&0.0),
        )
    }
}

/// Linear interpolation on a sorted grid; exact at the nodes.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let (first, last) = (xs[0], xs[xs.len() - 1]);
    let eps = 1e-9 * (last - first).abs().max(1.0);
    if x < first - eps || x > last + eps {
        return None;
    }
    let x = x.clamp(first, last);
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => Some(ys[i]),
        Err(i) => {
            let (i0, i1) = (i - 1, i);
            let w = (x - xs[i0]) / (xs[i1] - xs[i0]);
            Some(ys[i0] + w * (ys[i1] - ys[i0]))
        }
    }
}

/// Precompute Γ (and optionally φ) over the configured time grid.
///
/// Time points are distributed across workers; each point's quadrature sum
/// runs in a fixed order, so the result is bitwise independent of the
/// scheduling.
pub fn build_profile(
    cfg: &SimulationConfig,
    temperature_k: f64,
) -> Result<DephasingProfile, PhononError> {
    let coupling = ExcitonPhononCoupling::from_config(cfg);
    let grid = SpectralGrid::for_config(cfg)?;
    let times = cfg.time_grid.points();

    let class_curves = gamma_class_curves(&coupling, temperature_k, &grid, &times);

    if cfg.quadrature.check_convergence {
        let fine = gamma_class_curves(&coupling, temperature_k, &grid.doubled(), &times);
        let tol = cfg.quadrature.convergence_rel_tol;
        for (ci, class) in GAMMA_CLASSES.iter().enumerate() {
            for (ti, &t) in times.iter().enumerate() {
                let (coarse_v, fine_v) = (class_curves[ci][ti], fine[ci][ti]);
                let rel = (coarse_v - fine_v).abs() / fine_v.abs().max(coarse_v.abs()).max(1e-14);
                if rel > tol {
                    let pair = match class {
                        GammaClass::Single => CoherencePair::B00B01,
                        GammaClass::ExcitonSwap => CoherencePair::B01B10,
                        GammaClass::DoubleExciton => CoherencePair::B00B11,
                    };
                    return Err(PhononError::NonConvergence {
                        pair: pair.label(),
                        t_ps: t,
                        rel,
                        tol,
                    });
                }
            }
        }
    }

    let class_of = |pair: CoherencePair| match pair.gamma_class() {
        GammaClass::Single => 0usize,
        GammaClass::ExcitonSwap => 1,
        GammaClass::DoubleExciton => 2,
    };
    let gamma: [Vec<f64>; 6] =
        std::array::from_fn(|pi| class_curves[class_of(CoherencePair::ALL[pi])].clone());

    let phase = if cfg.include_phonon_phase {
        let tables: Vec<PhaseTable> = CoherencePair::ALL
            .iter()
            .map(|&pair| coupling.phase_table(pair, &grid))
            .collect();
        let curves: Vec<Vec<f64>> = tables
            .par_iter()
            .map(|table| times.iter().map(|&t| table.eval(t)).collect())
            .collect();
        let mut arr: [Vec<f64>; 6] = Default::default();
        for (i, c) in curves.into_iter().enumerate() {
            arr[i] = c;
        }
        Some(arr)
    } else {
        None
    };

    Ok(DephasingProfile {
        temperature_k,
        times_ps: times,
        gamma,
        phase,
        detuning_mev: cfg.detuning_mev,
    })
}

fn gamma_class_curves(
    coupling: &ExcitonPhononCoupling,
    temperature_k: f64,
    grid: &SpectralGrid,
    times: &[f64],
) -> [Vec<f64>; 3] {
    let tables: Vec<GammaTable> = GAMMA_CLASSES
        .iter()
        .map(|&class| coupling.gamma_table(class, temperature_k, grid))
        .collect();
    let mut out: [Vec<f64>; 3] = Default::default();
    for (ci, table) in tables.iter().enumerate() {
        out[ci] = times.par_iter().map(|&t| table.eval(t)).collect();
    }
    out
}
