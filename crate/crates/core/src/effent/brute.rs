//! Exhaustive grid oracle for the three standard setups.
//!
//! Every probed point is a physical state satisfying the record exactly, so
//! the returned minimum is always an upper bound on the true one; grid
//! density (the `resolution` parameter, points per free population axis,
//! with one ×16 refinement pass around the incumbent) controls how tight.
//!
//! Search spaces per setup:
//!
//! * full — populations and Re h are pinned by the record; the grid covers
//!   the five free off-diagonals inside their PSD box.
//! * xz — free populations reduce to (b, c); on the zero-off-diagonal plane
//!   the concurrence is the X-state closed form, so the plane is swept
//!   exhaustively and off-diagonal excursions are probed around the best
//!   cells.
//! * z only — averaging a feasible state with its image under the local
//!   unitary σ_x⊗σ_x (which fixes z) and under the qubit swap cannot
//!   increase the convex concurrence, so the minimum is attained on the
//!   symmetric slice a = d, b = c, h real: one free population parameter.
//!   Off-diagonal excursions are still probed around the incumbent.

use nalgebra::Matrix4;

use crate::measure::{reconstruct_diagonals, reconstruct_reh, SetupLabel};
use crate::state::spin_flip_real;

use super::ConstraintSet;

/// Concurrence of a real symmetric candidate, or None when it fails PSD.
fn real_concurrence_checked(m: &Matrix4<f64>) -> Option<f64> {
    let se = nalgebra::linalg::SymmetricEigen::new(*m);
    if se.eigenvalues.iter().any(|&e| e < -1e-10) {
        return None;
    }
    let mut l = se.eigenvectors;
    for j in 0..4 {
        let s = se.eigenvalues[j].max(0.0).sqrt();
        for i in 0..4 {
            l[(i, j)] *= s;
        }
    }
    let d = l.transpose() * spin_flip_real() * l;
    let mut s: [f64; 4] = d.symmetric_eigenvalues().map(f64::abs).into();
    s.sort_by(|a, b| b.total_cmp(a));
    Some((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

fn assemble(diag: [f64; 4], reh: f64, off: [f64; 5]) -> Matrix4<f64> {
    let [u, v, g, p, q] = off;
    let [a, b, c, d] = diag;
    Matrix4::new(
        a, u, v, g, //
        u, b, reh, p, //
        v, reh, c, q, //
        g, p, q, d,
    )
}

/// X-state closed form on the zero-off-diagonal plane.
fn plane_value(diag: [f64; 4], reh: f64) -> f64 {
    let [a, b, c, d] = diag;
    crate::state::x_state_concurrence(a, b, c, d, 0.0, reh.abs())
}

/// Probe the five off-diagonals on a coarse grid inside the PSD box around
/// a plane point; returns the best value found including the plane value.
fn probe_offdiagonals(diag: [f64; 4], reh: f64, levels: usize) -> f64 {
    let [a, b, c, d] = diag;
    let bounds = [
        (a * b).max(0.0).sqrt(), // u
        (a * c).max(0.0).sqrt(), // v
        (a * d).max(0.0).sqrt(), // g
        (b * d).max(0.0).sqrt(), // p
        (c * d).max(0.0).sqrt(), // q
    ];
    let mut best = plane_value(diag, reh);
    let steps: Vec<f64> = (0..levels)
        .map(|l| (l + 1) as f64 / levels as f64)
        .collect();
    // {-δ, 0, +δ} per axis at each level, skipping the all-zero combination
    for &scale in &steps {
        let deltas: Vec<[f64; 3]> = bounds
            .iter()
            .map(|bd| [-bd * scale, 0.0, bd * scale])
            .collect();
        for mask in 1..3usize.pow(5) {
            let mut off = [0.0; 5];
            let mut m = mask;
            for k in 0..5 {
                off[k] = deltas[k][m % 3];
                m /= 3;
            }
            let cand = assemble(diag, reh, off);
            if let Some(value) = real_concurrence_checked(&cand) {
                if value < best {
                    best = value;
                }
            }
        }
    }
    best
}

/// Upper bound on the effective entanglement by exhaustive search.
///
/// Requires a record-backed constraint set for one of the three standard
/// setups. `resolution` is the number of grid points per free population
/// axis; the error of the bound scales like O(1/resolution).
pub fn brute_force_oracle(cs: &ConstraintSet, resolution: usize) -> f64 {
    let record = cs
        .record
        .as_ref()
        .expect("brute-force oracle needs a record-backed constraint set");
    assert!(resolution >= 8, "resolution too coarse");
    match record.setup {
        SetupLabel::ZOnly => brute_z(record.z.expect("validated record"), resolution),
        SetupLabel::XZ => brute_xz(
            record.x.expect("validated record"),
            record.z.expect("validated record"),
            resolution,
        ),
        SetupLabel::Full => brute_full(record, resolution),
        SetupLabel::Custom => panic!("brute-force oracle supports the three standard setups only"),
    }
}

fn brute_z(z: f64, resolution: usize) -> f64 {
    let eval = |beta: f64| -> Option<([f64; 4], f64)> {
        if !(0.0..=0.5).contains(&beta) {
            return None;
        }
        let reh = (z - 2.0 * beta) / 2.0;
        if reh * reh > beta * beta + 1e-14 {
            return None; // |Re h| ≤ b = c needed for PSD
        }
        let ad = (1.0 - 2.0 * beta) / 2.0;
        Some(([ad, beta, beta, ad], reh))
    };

    let scan = |lo: f64, hi: f64, n: usize| -> (f64, f64) {
        let mut best_val = f64::INFINITY;
        let mut best_beta = lo;
        for i in 0..=n {
            let beta = lo + (hi - lo) * i as f64 / n as f64;
            if let Some((diag, reh)) = eval(beta) {
                let v = plane_value(diag, reh);
                if v < best_val {
                    best_val = v;
                    best_beta = beta;
                }
            }
        }
        (best_beta, best_val)
    };

    let (beta1, mut best) = scan(0.0, 0.5, resolution);
    let step = 0.5 / resolution as f64;
    let (beta2, refined) = scan(
        (beta1 - step).max(0.0),
        (beta1 + step).min(0.5),
        16.max(resolution / 4),
    );
    best = best.min(refined);

    for beta in [beta1, beta2] {
        if let Some((diag, reh)) = eval(beta) {
            best = best.min(probe_offdiagonals(diag, reh, 2));
        }
    }
    best
}

fn brute_xz(x: f64, z: f64, resolution: usize) -> f64 {
    let eval = |b: f64, c: f64| -> Option<([f64; 4], f64)> {
        let a = x - b;
        let d = 1.0 - x - c;
        if a < -1e-12 || d < -1e-12 || b < 0.0 || c < 0.0 {
            return None;
        }
        let reh = (z - b - c) / 2.0;
        if reh * reh > b * c + 1e-12 {
            return None;
        }
        Some(([a.max(0.0), b, c, d.max(0.0)], reh))
    };

    let scan = |b_lo: f64, b_hi: f64, c_lo: f64, c_hi: f64, n: usize| -> (f64, f64, f64) {
        let mut best = (f64::INFINITY, b_lo, c_lo);
        for i in 0..=n {
            let b = b_lo + (b_hi - b_lo) * i as f64 / n as f64;
            for j in 0..=n {
                let c = c_lo + (c_hi - c_lo) * j as f64 / n as f64;
                if let Some((diag, reh)) = eval(b, c) {
                    let v = plane_value(diag, reh);
                    if v < best.0 {
                        best = (v, b, c);
                    }
                }
            }
        }
        (best.1, best.2, best.0)
    };

    let (b1, c1, mut best) = scan(0.0, x, 0.0, 1.0 - x, resolution);
    if !best.is_finite() {
        return f64::INFINITY;
    }
    let db = x / resolution as f64;
    let dc = (1.0 - x) / resolution as f64;
    let (b2, c2, refined) = scan(
        (b1 - db).max(0.0),
        (b1 + db).min(x),
        (c1 - dc).max(0.0),
        (c1 + dc).min(1.0 - x),
        16.max(resolution / 4),
    );
    best = best.min(refined);

    for (b, c) in [(b1, c1), (b2, c2)] {
        if let Some((diag, reh)) = eval(b, c) {
            best = best.min(probe_offdiagonals(diag, reh, 2));
        }
    }
    best
}

fn brute_full(record: &crate::measure::MeasurementRecord, resolution: usize) -> f64 {
    let (x, y, z, d) = (
        record.x.expect("validated record"),
        record.y.expect("validated record"),
        record.z.expect("validated record"),
        record.d.expect("validated record"),
    );
    let diag = match reconstruct_diagonals(x, y, d) {
        Ok(v) => v,
        Err(_) => return f64::INFINITY,
    };
    let reh = match reconstruct_reh(x, y, z, d) {
        Ok(v) => v,
        Err(_) => return f64::INFINITY,
    };

    let [a, b, c, dd] = diag;
    let bounds = [
        (a * b).max(0.0).sqrt(),
        (a * c).max(0.0).sqrt(),
        (a * dd).max(0.0).sqrt(),
        (b * dd).max(0.0).sqrt(),
        (c * dd).max(0.0).sqrt(),
    ];
    let per_axis = (resolution.min(9) | 1).max(5); // odd, 5..9: grid includes 0
    let mut best = plane_value(diag, reh);
    let mut incumbent = [0.0; 5];
    let mut idx = [0usize; 5];
    loop {
        let off: [f64; 5] = std::array::from_fn(|k| {
            let t = idx[k] as f64 / (per_axis - 1) as f64;
            bounds[k] * (2.0 * t - 1.0)
        });
        let cand = assemble(diag, reh, off);
        if let Some(v) = real_concurrence_checked(&cand) {
            if v < best {
                best = v;
                incumbent = off;
            }
        }
        // odometer over the 5-dim grid
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == 5 {
                break;
            }
        }
        if k == 5 {
            break;
        }
    }

    // one refinement around the incumbent: ±1 coarse cell, 5 points per axis
    let coarse_step: [f64; 5] =
        std::array::from_fn(|k| 2.0 * bounds[k] / (per_axis - 1) as f64);
    let mut idx = [0usize; 5];
    loop {
        let off: [f64; 5] = std::array::from_fn(|k| {
            let t = idx[k] as f64 / 4.0;
            (incumbent[k] + coarse_step[k] * (2.0 * t - 1.0))
                .clamp(-bounds[k], bounds[k])
        });
        let cand = assemble(diag, reh, off);
        if let Some(v) = real_concurrence_checked(&cand) {
            if v < best {
                best = v;
            }
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < 5 {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == 5 {
                break;
            }
        }
        if k == 5 {
            break;
        }
    }
    best
}
