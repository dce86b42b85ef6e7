//! Shared test oracles, kept deliberately independent of the library's
//! integration path: adaptive Simpson quadrature with its own node
//! placement, and a second transcription of the coupling formulas.

use dqdsim_core::config::SimulationConfig;
use dqdsim_core::units::{HBAR_MEV_PS, KB_MEV_PER_K};
use dqdsim_core::CoherencePair;

/// Adaptive Simpson over geometrically refined panels. The integrands here
/// concentrate near k = 0 under a Gaussian envelope, so a single panel's
/// initial samples can miss all the mass; the dyadic split guarantees the
/// sampler sees it.
pub fn adaptive_simpson_paneled<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let mut edges = vec![a];
    let mut w = (b - a) / 128.0;
    let mut x = a + w;
    while x < b - 1e-12 {
        edges.push(x);
        x += w;
        w *= 2.0;
    }
    edges.push(b);
    let n = edges.len() - 1;
    edges
        .windows(2)
        .map(|p| adaptive_simpson(f, p[0], p[1], tol / n as f64))
        .sum()
}

/// Recursive adaptive Simpson rule with absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, tol, 28)
}

/// Independent transcription of the squared coupling form factor.
pub fn oracle_form_factor_sq(cfg: &SimulationConfig, k_perp: f64, k_z: f64) -> f64 {
    let m = &cfg.material;
    let g = &cfg.geometry;
    let k = (k_perp * k_perp + k_z * k_z).sqrt();
    let rho = m.density_internal();
    let envelope_z = (-(g.z_extent_nm.powi(2)) * k_z * k_z / 2.0).exp();
    let electron = m.sigma_e_mev * (-(g.electron_extent_nm.powi(2)) * k_perp * k_perp / 4.0).exp();
    let hole = m.sigma_h_mev * (-(g.hole_extent_nm.powi(2)) * k_perp * k_perp / 4.0).exp();
    HBAR_MEV_PS * k * envelope_z * (electron - hole).powi(2) / (2.0 * rho * m.sound_speed_nm_ps)
}

fn oracle_pair_factor(cfg: &SimulationConfig, pair: CoherencePair, k_z: f64) -> f64 {
    let half = k_z * cfg.geometry.dot_separation_nm / 2.0;
    match pair {
        CoherencePair::B01B10 => 4.0 * half.sin().powi(2),
        CoherencePair::B00B11 => 4.0 * half.cos().powi(2),
        _ => 1.0,
    }
}

/// coth(ħω / 2k_BT) via tanh, a different route than the library's expm1.
fn oracle_coth(hbar_omega: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        return 1.0;
    }
    let x = hbar_omega / (2.0 * KB_MEV_PER_K * temperature_k);
    1.0 / x.tanh()
}

/// Γ(t, T) by nested adaptive quadrature over the same cutoff box the
/// library uses, with independent node placement.
pub fn oracle_gamma(
    cfg: &SimulationConfig,
    pair: CoherencePair,
    t_ps: f64,
    temperature_k: f64,
) -> f64 {
    let g = &cfg.geometry;
    let l_min = g
        .electron_extent_nm
        .min(g.hole_extent_nm)
        .min(g.z_extent_nm);
    let k_max = cfg.quadrature.cutoff_multiplier / l_min;
    let c = cfg.material.sound_speed_nm_ps;

    let inner_tol = 1e-10;
    let outer = |k_perp: f64| -> f64 {
        if k_perp == 0.0 {
            return 0.0;
        }
        let integrand = |k_z: f64| -> f64 {
            let k = (k_perp * k_perp + k_z * k_z).sqrt();
            let omega = c * k;
            let hbar_omega = HBAR_MEV_PS * omega;
            let weight = oracle_form_factor_sq(cfg, k_perp, k_z) * oracle_pair_factor(cfg, pair, k_z);
            let osc = 1.0 - (omega * t_ps).cos();
            k_perp * weight * osc * oracle_coth(hbar_omega, temperature_k)
                / (hbar_omega * hbar_omega)
        };
        adaptive_simpson_paneled(&integrand, 0.0, k_max, inner_tol)
    };
    adaptive_simpson_paneled(&outer, 0.0, k_max, 1e-10) / (2.0 * std::f64::consts::PI.powi(2))
}

/// Phase exponent oracle for pairs with one vanishing coupling (the sin
/// transient with unit weight); covers the (00,01) and (00,10) pairs.
pub fn oracle_phase_single(cfg: &SimulationConfig, t_ps: f64) -> f64 {
    let g = &cfg.geometry;
    let l_min = g
        .electron_extent_nm
        .min(g.hole_extent_nm)
        .min(g.z_extent_nm);
    let k_max = cfg.quadrature.cutoff_multiplier / l_min;
    let c = cfg.material.sound_speed_nm_ps;

    let outer = |k_perp: f64| -> f64 {
        if k_perp == 0.0 {
            return 0.0;
        }
        let integrand = |k_z: f64| -> f64 {
            let k = (k_perp * k_perp + k_z * k_z).sqrt();
            let omega = c * k;
            let hbar_omega = HBAR_MEV_PS * omega;
            k_perp * oracle_form_factor_sq(cfg, k_perp, k_z) * (omega * t_ps).sin()
                / (hbar_omega * hbar_omega)
        };
        adaptive_simpson_paneled(&integrand, 0.0, k_max, 1e-10)
    };
    // even in k_z: half-range doubled
    adaptive_simpson_paneled(&outer, 0.0, k_max, 1e-10) / (2.0 * std::f64::consts::PI.powi(2))
}
