//! Gauss–Legendre quadrature and the 2-D momentum grid used by the
//! phonon integrals.

use serde::{Deserialize, Serialize};

use crate::config::SimulationConfig;
use crate::phonon::PhononError;

/// Gauss–Legendre rule on [-1, 1].
///
/// Nodes are the roots of the Legendre polynomial P_n, found by Newton
/// iteration on the three-term recurrence; weights are
/// 2 / ((1 - x²) P'_n(x)²). A rule of n nodes integrates polynomials up to
/// degree 2n-1 exactly.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least 2 nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi-style initial guess, then Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (_, d2) = legendre_with_derivative(n, x);
                    dp = d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn scaled(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let nodes = self.nodes.iter().map(|x| mid + half * x).collect();
        let weights = self.weights.iter().map(|w| w * half).collect();
        (nodes, weights)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let (xs, ws) = self.scaled(a, b);
        xs.iter().zip(&ws).map(|(x, w)| f(*x) * w).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Tensor quadrature grid in cylindrical momentum coordinates:
/// k_perp ∈ [0, k_perp_max], k_z ∈ [0, k_z_max] (the z half-range; even
/// integrands are doubled, full-range integrands mirror the nodes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub k_perp_nodes: Vec<f64>,
    pub k_perp_weights: Vec<f64>,
    pub k_z_nodes: Vec<f64>,
    pub k_z_weights: Vec<f64>,
    pub k_perp_max: f64,
    pub k_z_max: f64,
}

impl SpectralGrid {
    pub fn new(
        n_perp: usize,
        n_z: usize,
        k_perp_max: f64,
        k_z_max: f64,
    ) -> Result<Self, PhononError> {
        if n_perp < 2 || n_z < 2 {
            return Err(PhononError::BadGrid(format!(
                "node counts must be >= 2, got ({n_perp}, {n_z})"
            )));
        }
        if !(k_perp_max > 0.0) || !(k_z_max > 0.0) {
            return Err(PhononError::BadGrid(format!(
                "cutoffs must be > 0, got ({k_perp_max}, {k_z_max})"
            )));
        }
        let (k_perp_nodes, k_perp_weights) = GaussLegendre::new(n_perp).scaled(0.0, k_perp_max);
        let (k_z_nodes, k_z_weights) = GaussLegendre::new(n_z).scaled(0.0, k_z_max);
        debug_assert!(k_perp_weights.iter().all(|w| *w > 0.0));
        debug_assert!(k_z_weights.iter().all(|w| *w > 0.0));
        Ok(Self {
            k_perp_nodes,
            k_perp_weights,
            k_z_nodes,
            k_z_weights,
            k_perp_max,
            k_z_max,
        })
    }

    /// Grid for a configuration: cutoff = multiplier / min extension, node
    /// counts scaled linearly with the number of cos(ωt) oscillations over
    /// the cutoff at the largest requested time, floored at the configured
    /// counts.
    pub fn for_config(cfg: &SimulationConfig) -> Result<Self, PhononError> {
        let g = &cfg.geometry;
        let l_min = g
            .electron_extent_nm
            .min(g.hole_extent_nm)
            .min(g.z_extent_nm);
        let k_max = cfg.quadrature.cutoff_multiplier / l_min;
        let t_max = cfg.time_grid.stop_ps.max(cfg.time_grid.start_ps);
        let cycles = t_max * cfg.material.sound_speed_nm_ps * k_max / std::f64::consts::TAU;
        let scaled = (cycles * cfg.quadrature.nodes_per_cycle).ceil() as usize;
        let n_perp = cfg.quadrature.perp_nodes.max(scaled);
        let n_z = cfg.quadrature.z_nodes.max(scaled);
        Self::new(n_perp, n_z, k_max, k_max)
    }

    /// Same cutoffs with both node counts doubled (convergence checks).
    pub fn doubled(&self) -> Self {
        Self::new(
            2 * self.k_perp_nodes.len(),
            2 * self.k_z_nodes.len(),
            self.k_perp_max,
            self.k_z_max,
        )
        .expect("doubling a valid grid cannot fail")
    }
}
