//! Penalized Gram-factor minimization of the concurrence.
//!
//! States are parameterized as ρ = M Mᵀ / tr(M Mᵀ) over unconstrained real
//! 4×4 factors (PSD and unit trace hold by construction; the factorization
//! also keeps ρ real symmetric, which is exactly the search space after the
//! real-part reduction). Linear data constraints Tr(A_i ρ) = v_i enter as
//! quadratic penalties with escalating weight.
//!
//! The concurrence of the factored state needs no spin-flip eigenproblem:
//! with D = Mᵀ (σ_y⊗σ_y) M, which is symmetric, the Wootters square roots
//! are |eig(D)| / τ, so one symmetric eigendecomposition per evaluation
//! suffices, and its eigenvectors give the exact subgradient
//! ∂ eig_i(D)/∂M = 2 (σ_y⊗σ_y) M u_i u_iᵀ.
//!
//! The true problem (convex objective over the convex feasible set) has no
//! spurious minima; random restarts only guard against artifacts of the
//! factor parameterization.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::derive_seed;
use crate::state::spin_flip_real;

/// Minimizer controls. Defaults give reproducible CI-grade runs.
#[derive(Debug, Clone)]
pub struct MinimizeOpts {
    /// Random restarts, seeded deterministically from `seed`.
    pub restarts: usize,
    /// First penalty weight of the continuation.
    pub penalty_initial: f64,
    /// Last scheduled penalty weight.
    pub penalty_max: f64,
    /// Per-stage weight multiplier.
    pub penalty_growth: f64,
    /// Objective-change threshold for the stall test.
    pub stall_tol: f64,
    /// Iterations without significant improvement before a stage stops.
    pub stall_window: usize,
    /// Hard iteration cap per stage.
    pub max_iters_per_stage: usize,
    /// Witness feasibility requirement (max constraint violation).
    pub feasibility_tol: f64,
    pub seed: u64,
}

impl Default for MinimizeOpts {
    fn default() -> Self {
        Self {
            restarts: 16,
            penalty_initial: 1e2,
            penalty_max: 1e6,
            penalty_growth: 10.0,
            stall_tol: 1e-9,
            stall_window: 50,
            max_iters_per_stage: 2000,
            feasibility_tol: 1e-6,
            seed: 1,
        }
    }
}

impl MinimizeOpts {
    /// Derived options for scan cells: same schedule, per-cell seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

pub(crate) struct EngineResult {
    pub rho: Matrix4<f64>,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct ComplexEngineResult {
    pub rho: Matrix4<C64>,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[inline]
fn rho_of(m: &Matrix4<f64>) -> (Matrix4<f64>, f64) {
    let gram = m * m.transpose();
    let tau = gram.trace();
    (gram / tau, tau)
}

/// Concurrence of ρ(M) without forming ρ.
fn concurrence_of_factor(m: &Matrix4<f64>) -> f64 {
    let tau = m.iter().map(|x| x * x).sum::<f64>();
    let d = m.transpose() * spin_flip_real() * m;
    let mut s: [f64; 4] = d.symmetric_eigenvalues().map(f64::abs).into();
    s.sort_by(|a, b| b.total_cmp(a));
    ((s[0] - s[1] - s[2] - s[3]) / tau).max(0.0)
}

struct RealProblem<'a> {
    cons: &'a [(Matrix4<f64>, f64)],
}

impl RealProblem<'_> {
    fn residuals(&self, m: &Matrix4<f64>) -> Vec<f64> {
        let (rho, _) = rho_of(m);
        self.cons
            .iter()
            .map(|(a, v)| (a * rho).trace() - v)
            .collect()
    }

    fn max_violation(&self, m: &Matrix4<f64>) -> f64 {
        self.residuals(m)
            .into_iter()
            .fold(0.0f64, |acc, r| acc.max(r.abs()))
    }

    fn objective(&self, m: &Matrix4<f64>, weight: f64) -> f64 {
        let penalty: f64 = self.residuals(m).into_iter().map(|r| r * r).sum();
        concurrence_of_factor(m) + weight * penalty
    }

    fn objective_and_grad(&self, m: &Matrix4<f64>, weight: f64) -> (f64, Matrix4<f64>) {
        let y = spin_flip_real();
        let tau = m.iter().map(|x| x * x).sum::<f64>();
        let rho = (m * m.transpose()) / tau;

        let d = m.transpose() * y * m;
        let se = nalgebra::linalg::SymmetricEigen::new(d);
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &j| se.eigenvalues[j].abs().total_cmp(&se.eigenvalues[i].abs()));
        let abs_sorted: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i].abs()).collect();
        let numerator = abs_sorted[0] - abs_sorted[1] - abs_sorted[2] - abs_sorted[3];
        let c_val = (numerator / tau).max(0.0);

        let mut grad = Matrix4::zeros();
        if numerator / tau > 0.0 {
            // dN/dM = Σ κ_i sign(d_i) 2 Y M u_i u_iᵀ, κ = +1 for the top |d|
            let ym = y * m;
            for (rank, &i) in order.iter().enumerate() {
                let kappa = if rank == 0 { 1.0 } else { -1.0 };
                let sgn = if se.eigenvalues[i] >= 0.0 { 1.0 } else { -1.0 };
                let u = se.eigenvectors.column(i);
                let coeff = kappa * sgn;
                // 2 coeff (Y M) u uᵀ
                let ymu = ym * u;
                for r in 0..4 {
                    for c in 0..4 {
                        grad[(r, c)] += 2.0 * coeff * ymu[r] * u[c];
                    }
                }
            }
            grad /= tau;
            // quotient rule for the 1/τ normalization
            grad -= m * (2.0 * numerator / (tau * tau));
        }

        let mut penalty = 0.0;
        for (a, v) in self.cons {
            let r = (a * rho).trace() - v;
            penalty += r * r;
            // ∂r/∂M = (2/τ)(A M − tr(Aρ) M)
            let coef = 2.0 * weight * r * 2.0 / tau;
            grad += (a * m - m * (r + v)) * coef;
        }

        (c_val + weight * penalty, grad)
    }
}

/// Monotone gradient descent with multiplicative step adaptation. Robust to
/// the |eig| kinks of the objective; exactness comes from the penalty
/// continuation, not from this inner loop.
fn descend(
    problem: &RealProblem<'_>,
    m: &mut Matrix4<f64>,
    weight: f64,
    opts: &MinimizeOpts,
) -> (f64, usize, bool) {
    let (mut f, mut g) = problem.objective_and_grad(m, weight);
    let gnorm = g.norm().max(1e-12);
    let mut step = 0.1 * m.norm().max(1.0) / gnorm;
    let mut iters = 0;
    let mut last_gain_iter = 0usize;
    let mut stalled = false;
    for it in 0..opts.max_iters_per_stage {
        iters = it + 1;
        let trial = *m - g * step;
        let ft = problem.objective(&trial, weight);
        if ft < f {
            if f - ft > opts.stall_tol {
                last_gain_iter = it;
            }
            *m = trial;
            f = ft;
            g = problem.objective_and_grad(m, weight).1;
            step *= 1.25;
        } else {
            step *= 0.4;
            if step * g.norm() < 1e-16 {
                stalled = true;
                break;
            }
        }
        if it - last_gain_iter >= opts.stall_window {
            stalled = true;
            break;
        }
    }
    (f, iters, stalled)
}

fn penalty_stages(opts: &MinimizeOpts) -> Vec<f64> {
    let mut stages = Vec::new();
    let mut w = opts.penalty_initial;
    while w <= opts.penalty_max * (1.0 + 1e-9) {
        stages.push(w);
        w *= opts.penalty_growth;
    }
    if stages.is_empty() {
        stages.push(opts.penalty_max);
    }
    stages
}

/// Levenberg–Marquardt least squares on the constraint residuals alone.
/// Used to detect infeasibility and to snap a near-feasible factor the last
/// stretch onto the constraint manifold; the move is O(residual), so it
/// perturbs the minimized value negligibly. Plain gradient descent is
/// useless here: constraint gradients degenerate quadratically at the PSD
/// cone boundary, exactly where the minimizing witnesses live.
fn feasibility_polish(cons: &[(Matrix4<f64>, f64)], m: &mut Matrix4<f64>, max_iters: usize) -> usize {
    let k = cons.len();
    if k == 0 {
        return 0;
    }
    let residuals = |m: &Matrix4<f64>| -> Vec<f64> {
        let (rho, _) = rho_of(m);
        cons.iter().map(|(a, v)| (a * rho).trace() - v).collect()
    };
    let max_abs = |r: &[f64]| r.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));

    let mut lambda = 1e-10;
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        let r = residuals(m);
        let cur = max_abs(&r);
        if cur < 1e-13 {
            break;
        }
        let (rho, tau) = rho_of(m);
        // rows of the Jacobian: ∂r_i/∂M = (2/τ)(A_i M − tr(A_i ρ) M)
        let jac: Vec<Matrix4<f64>> = cons
            .iter()
            .zip(&r)
            .map(|((a, v), ri)| (a * *m - *m * (ri + v)) * (2.0 / tau))
            .collect();
        let mut jjt = nalgebra::DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let dot = jac[i].iter().zip(jac[j].iter()).map(|(x, y)| x * y).sum();
                jjt[(i, j)] = dot;
                jjt[(j, i)] = dot;
            }
        }
        let rv = nalgebra::DVector::from_vec(r.clone());
        let mut accepted = false;
        for _ in 0..40 {
            let mut damped = jjt.clone();
            for i in 0..k {
                damped[(i, i)] += lambda * (1.0 + jjt[(i, i)]);
            }
            let Some(sol) = damped.lu().solve(&rv) else {
                lambda *= 10.0;
                continue;
            };
            let mut delta = Matrix4::zeros();
            for i in 0..k {
                delta -= jac[i] * sol[i];
            }
            let trial = *m + delta;
            if max_abs(&residuals(&trial)) < cur {
                *m = trial;
                lambda = (lambda * 0.3).max(1e-14);
                accepted = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    iters
}

fn random_factor(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    Matrix4::from_fn(|_, _| {
        let x: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        0.7 * x
    })
}

fn offdiag_norm(rho: &Matrix4<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += rho[(i, j)] * rho[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Full minimization over real symmetric states.
pub(crate) fn minimize_real(
    cons: &[(Matrix4<f64>, f64)],
    opts: &MinimizeOpts,
    warm_start: Option<Matrix4<f64>>,
) -> EngineResult {
    let problem = RealProblem { cons };
    let stages = penalty_stages(opts);

    let mut best: Option<(Matrix4<f64>, f64, f64)> = None; // (M, value, residual)
    let mut total_iters = 0usize;
    let mut any_converged = false;

    let restarts = opts.restarts.max(1);
    for restart in 0..restarts {
        let mut m = if restart == 0 {
            warm_start.unwrap_or_else(|| Matrix4::identity() * 0.5)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, restart as u64));
            random_factor(&mut rng)
        };

        let mut final_stage_stalled = false;
        for &w in &stages {
            let (_, iters, stalled) = descend(&problem, &mut m, w, opts);
            total_iters += iters;
            final_stage_stalled = stalled;
        }
        // keep escalating while the witness misses the feasibility bar
        let mut w = stages.last().copied().unwrap_or(opts.penalty_max) * opts.penalty_growth;
        while problem.max_violation(&m) > opts.feasibility_tol && w <= 1e10 {
            let (_, iters, _) = descend(&problem, &mut m, w, opts);
            total_iters += iters;
            w *= opts.penalty_growth;
        }
        if problem.max_violation(&m) > 0.5 * opts.feasibility_tol {
            total_iters += feasibility_polish(cons, &mut m, 200);
        }

        let value = concurrence_of_factor(&m);
        let residual = problem.max_violation(&m);
        any_converged |= final_stage_stalled && residual <= opts.feasibility_tol;

        let better = match &best {
            None => true,
            Some((bm, bv, br)) => {
                let feas_new = residual <= opts.feasibility_tol;
                let feas_old = *br <= opts.feasibility_tol;
                if feas_new != feas_old {
                    feas_new
                } else if (value - bv).abs() > 1e-12 {
                    value < *bv
                } else {
                    offdiag_norm(&rho_of(&m).0) < offdiag_norm(&rho_of(bm).0)
                }
            }
        };
        if better {
            best = Some((m, value, residual));
        }
    }

    let (m, value, residual) = best.expect("at least one restart ran");
    EngineResult {
        rho: rho_of(&m).0,
        value,
        residual,
        iterations: total_iters,
        converged: any_converged && residual <= opts.feasibility_tol,
    }
}

/// Pure feasibility solve: can any factored state satisfy the constraints?
/// Minimizes Σ r² alone and reports the best max-violation reached.
pub(crate) fn feasibility_residual(cons: &[(Matrix4<f64>, f64)], opts: &MinimizeOpts) -> f64 {
    let problem = RealProblem { cons };
    let mut best = f64::INFINITY;
    for restart in 0..4u64 {
        let mut m = if restart == 0 {
            Matrix4::identity() * 0.5
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed ^ 0xfea5, restart));
            random_factor(&mut rng)
        };
        feasibility_polish(cons, &mut m, 400);
        best = best.min(problem.max_violation(&m));
        if best < 1e-10 {
            break;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Complex-state engine (used to confirm that the real-part reduction does
// not lose anything). Derivative-free compass search over the 32 real
// parameters of a complex factor.
// ---------------------------------------------------------------------------

fn complex_rho(params: &[f64; 32]) -> (Matrix4<C64>, f64) {
    let m = Matrix4::from_fn(|i, j| C64::new(params[4 * i + j], params[16 + 4 * i + j]));
    let gram = m * m.adjoint();
    let tau = gram.trace().re;
    (gram / C64::new(tau, 0.0), tau)
}

fn complex_concurrence(params: &[f64; 32]) -> f64 {
    let m = Matrix4::from_fn(|i, j| C64::new(params[4 * i + j], params[16 + 4 * i + j]));
    let tau: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let y = spin_flip_real().map(|x| C64::new(x, 0.0));
    let d = m.transpose() * y * m;
    let h = d.adjoint() * d;
    let mut s: [f64; 4] = nalgebra::linalg::SymmetricEigen::new(h)
        .eigenvalues
        .map(|x| x.max(0.0).sqrt())
        .into();
    s.sort_by(|a, b| b.total_cmp(a));
    ((s[0] - s[1] - s[2] - s[3]) / tau).max(0.0)
}

pub(crate) fn minimize_complex(
    cons: &[(Matrix4<C64>, f64)],
    opts: &MinimizeOpts,
) -> ComplexEngineResult {
    let residuals = |p: &[f64; 32]| -> Vec<f64> {
        let (rho, _) = complex_rho(p);
        cons.iter()
            .map(|(a, v)| (a * rho).trace().re - v)
            .collect()
    };
    let objective = |p: &[f64; 32], w: f64| -> f64 {
        let pen: f64 = residuals(p).into_iter().map(|r| r * r).sum();
        complex_concurrence(p) + w * pen
    };
    let max_violation = |p: &[f64; 32]| -> f64 {
        residuals(p).into_iter().fold(0.0f64, |a, r| a.max(r.abs()))
    };

    let stages = penalty_stages(opts);
    let mut best: Option<([f64; 32], f64, f64)> = None;
    let mut total_iters = 0usize;

    for restart in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed ^ 0xc0, restart as u64));
        let mut p: [f64; 32] = std::array::from_fn(|i| {
            if restart == 0 {
                if i < 16 && i % 5 == 0 {
                    0.5
                } else {
                    0.0
                }
            } else {
                0.7 * (rng.gen::<f64>() * 2.0 - 1.0)
            }
        });

        for &w in &stages {
            let mut step = 0.25;
            let mut f = objective(&p, w);
            while step > 1e-8 {
                total_iters += 1;
                let mut improved = false;
                for dim in 0..32 {
                    for sgn in [1.0, -1.0] {
                        let mut trial = p;
                        trial[dim] += sgn * step;
                        let ft = objective(&trial, w);
                        if ft < f {
                            p = trial;
                            f = ft;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
                if total_iters > opts.max_iters_per_stage * stages.len() {
                    break;
                }
            }
        }

        let value = complex_concurrence(&p);
        let res = max_violation(&p);
        let better = match &best {
            None => true,
            Some((_, bv, br)) => {
                let feas_new = res <= opts.feasibility_tol;
                let feas_old = *br <= opts.feasibility_tol;
                if feas_new != feas_old {
                    feas_new
                } else {
                    value < *bv
                }
            }
        };
        if better {
            best = Some((p, value, res));
        }
    }

    let (p, value, residual) = best.expect("at least one restart ran");
    ComplexEngineResult {
        rho: complex_rho(&p).0,
        value,
        residual,
        iterations: total_iters,
        converged: residual <= opts.feasibility_tol,
    }
}
