//! Effective entanglement: the minimum concurrence over every physical
//! state consistent with a measurement record.
//!
//! Because all SET observables are conjugation-invariant linear functionals
//! and the concurrence is convex and conjugation-invariant, the minimum is
//! attained on real symmetric states ([`ConstraintSet::real_restrict`]).
//! The three measurement setups come with closed-form candidates:
//!
//! * z only — b = c = Re h = z/4, a = d = (1 − z/2)/2, value max(0, z−1);
//! * x and z — maximize ad over the one-parameter family with the coherent
//!   condition Re h = √(bc), then minimize over the remaining off-diagonals;
//! * full data — populations and Re h fixed, minimize over the rest.
//!
//! The closed forms are treated as candidates only: the reported value is
//! always min(analytic, generic minimizer), and an independent brute-force
//! grid oracle upper-bounds the true minimum for cross-checks.

mod brute;
mod minimize;

pub use brute::brute_force_oracle;
pub use minimize::MinimizeOpts;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::measure::{MeasureError, MeasurementRecord, Observable};
use crate::state::{x_state_concurrence, StateError, TwoQubitState};

#[derive(Debug, Error)]
pub enum EffentError {
    #[error("no physical state is consistent with the record: {0}")]
    Infeasible(String),
    #[error("constraint {index} is not conjugation-symmetric; the real-part reduction does not apply")]
    ComplexConstraint { index: usize },
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// How a result was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Gradient,
    BruteForce,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Gradient => "gradient",
            Method::BruteForce => "brute_force",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Residuals {
    pub max_constraint_violation: f64,
    pub psd_margin: f64,
}

/// Minimum concurrence with its certificate.
#[derive(Debug, Clone)]
pub struct MinimizationResult {
    pub value: f64,
    /// A feasible state attaining `value`.
    pub witness: TwoQubitState,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Residuals,
}

/// One linear functional of the state with its target.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub operator: Matrix4<C64>,
    pub target: f64,
    pub tolerance: f64,
}

/// The feasible set of a minimization: {ρ PSD, tr ρ = 1, Tr(A_i ρ) = v_i}.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    pub real_restricted: bool,
    /// Retained source record, when built from one (setup dispatch).
    pub record: Option<MeasurementRecord>,
}

impl ConstraintSet {
    pub fn from_record(record: &MeasurementRecord) -> Result<Self, EffentError> {
        record.validate()?;
        let constraints = record
            .present()
            .into_iter()
            .map(|(obs, value)| Constraint {
                operator: obs.operator(),
                target: value,
                tolerance: 1e-6,
            })
            .collect();
        Ok(Self {
            constraints,
            real_restricted: false,
            record: Some(record.clone()),
        })
    }

    pub fn push(&mut self, operator: Matrix4<C64>, target: f64) {
        self.constraints.push(Constraint {
            operator,
            target,
            tolerance: 1e-6,
        });
    }

    /// Restrict the search to real symmetric states. Sound whenever every
    /// constraint operator is conjugation-symmetric (entrywise real);
    /// refuses otherwise, since e.g. a constraint on Im h is not invariant
    /// under ρ → ρ*.
    pub fn real_restrict(mut self) -> Result<Self, EffentError> {
        for (index, con) in self.constraints.iter().enumerate() {
            let max_im = con
                .operator
                .iter()
                .fold(0.0f64, |acc, z| acc.max(z.im.abs()));
            if max_im > 1e-14 {
                return Err(EffentError::ComplexConstraint { index });
            }
        }
        self.real_restricted = true;
        Ok(self)
    }

    pub fn max_violation(&self, rho: &TwoQubitState) -> f64 {
        self.constraints
            .iter()
            .map(|c| ((c.operator * rho.matrix()).trace().re - c.target).abs())
            .fold(0.0, f64::max)
    }

    fn real_ops(&self) -> Vec<(Matrix4<f64>, f64)> {
        self.constraints
            .iter()
            .map(|c| (c.operator.map(|z| z.re), c.target))
            .collect()
    }
}

fn result_from_state(
    witness: TwoQubitState,
    cs: &ConstraintSet,
    method: Method,
    iterations: usize,
    converged: bool,
) -> MinimizationResult {
    let value = witness.concurrence();
    let residuals = Residuals {
        max_constraint_violation: cs.max_violation(&witness),
        psd_margin: witness.min_eigenvalue(),
    };
    MinimizationResult {
        value,
        witness,
        method,
        iterations,
        converged,
        residuals,
    }
}

/// Effective entanglement when only z = b + c + 2 Re h is known.
///
/// The minimizing state is the coherent completion b = c = Re h = z/4 with
/// the rest of the population split evenly, a = d = (1 − z/2)/2, giving
/// max(0, z − 1). That this is the true minimum follows from the
/// fully-entangled-fraction bound C ≥ 2⟨+|ρ|+⟩ − 1 = z − 1, which the
/// witness attains.
pub fn eff_z(z: f64) -> MinimizationResult {
    assert!(
        (-1e-9..=2.0 + 1e-9).contains(&z),
        "z = {z} outside [0, 2]"
    );
    let z = z.clamp(0.0, 2.0);
    let q = z / 4.0;
    let ad = (1.0 - z / 2.0) / 2.0;
    let witness = TwoQubitState::x_state(ad, q, q, ad, C64::new(0.0, 0.0), C64::new(q, 0.0))
        .expect("the coherent completion is a valid state");
    let mut cs = ConstraintSet::default();
    cs.push(Observable::Z.operator(), z);
    let mut result = result_from_state(witness, &cs, Method::Analytic, 0, true);
    // closed form, exact; the eigenvalue route agrees to rounding
    result.value = (z - 1.0).max(0.0);
    result
}

/// The population tuple that maximizes ad for given (x, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdMaxTuple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub reh: f64,
}

/// Maximize ad under the coherent-state condition Re h = √(bc).
///
/// With x = a + b fixed and z absorbed through c = (√z − √b)², the product
/// is ad(b) = (x − b)(1 − x − (√z − √b)²), maximized over the feasible
/// interval {b : a ≥ 0, c ≥ 0, d ≥ 0, b ≤ x} by a dense bracketing scan
/// plus golden-section refinement.
pub fn maximize_ad_xz(x: f64, z: f64) -> Result<AdMaxTuple, EffentError> {
    assert!((-1e-9..=1.0 + 1e-9).contains(&x), "x = {x} outside [0, 1]");
    assert!((-1e-9..=2.0 + 1e-9).contains(&z), "z = {z} outside [0, 2]");
    let x = x.clamp(0.0, 1.0);
    let z = z.clamp(0.0, 2.0);
    let sz = z.sqrt();
    let s1x = (1.0 - x).max(0.0).sqrt();

    let b_lo = (sz - s1x).max(0.0).powi(2);
    let b_hi = x.min((sz + s1x).powi(2));
    if b_lo > b_hi + 1e-12 {
        return Err(EffentError::Infeasible(format!(
            "no population split matches x = {x}, z = {z}"
        )));
    }
    let b_lo = b_lo.min(b_hi);

    let ad = |b: f64| -> f64 {
        let c = (sz - b.sqrt()).powi(2);
        (x - b) * (1.0 - x - c)
    };

    // bracket on a dense scan, then golden-section inside the bracket
    let n = 512usize;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=n {
        let b = b_lo + (b_hi - b_lo) * i as f64 / n as f64;
        let v = ad(b);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let width = (b_hi - b_lo) / n as f64;
    let mut lo = b_lo + width * (best_i.saturating_sub(1)) as f64;
    let mut hi = (b_lo + width * (best_i + 1) as f64).min(b_hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut m1 = hi - INV_PHI * (hi - lo);
    let mut m2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (ad(m1), ad(m2));
    for _ in 0..120 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 < f2 {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + INV_PHI * (hi - lo);
            f2 = ad(m2);
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - INV_PHI * (hi - lo);
            f1 = ad(m1);
        }
    }
    let mut b = 0.5 * (lo + hi);
    if ad(b_lo) >= ad(b) {
        b = b_lo;
    }
    if ad(b_hi) >= ad(b) {
        b = b_hi;
    }

    let sb = b.sqrt();
    let c = (sz - sb).powi(2);
    let a = (x - b).max(0.0);
    let d = (1.0 - x - c).max(0.0);
    let reh = sb * (sz - sb);
    Ok(AdMaxTuple { a, b, c, d, reh })
}

/// Shared tail of the xz and full setups: populations and Re h pinned,
/// concurrence minimized over the five remaining real off-diagonals.
fn eff_fixed_entries(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    reh: f64,
    opts: &MinimizeOpts,
) -> Result<MinimizationResult, EffentError> {
    let witness_x = TwoQubitState::x_state(a, b, c, d, C64::new(0.0, 0.0), C64::new(reh, 0.0))
        .map_err(|e| EffentError::Infeasible(format!("pinned entries are unphysical: {e}")))?;
    let analytic_value = x_state_concurrence(a, b, c, d, 0.0, reh.abs());

    let mut cs = ConstraintSet::default();
    for (i, target) in [(0usize, a), (1, b), (2, c), (3, d)] {
        let mut op: Matrix4<C64> = Matrix4::zeros();
        op[(i, i)] = C64::new(1.0, 0.0);
        cs.push(op, target);
    }
    let mut h_op: Matrix4<C64> = Matrix4::zeros();
    h_op[(1, 2)] = C64::new(1.0, 0.0);
    h_op[(2, 1)] = C64::new(1.0, 0.0);
    cs.push(h_op, 2.0 * reh);
    let cs = cs.real_restrict()?;

    let warm = real_factor(&witness_x);
    let engine = minimize::minimize_real(&cs.real_ops(), opts, Some(warm));
    let generic_feasible = engine.residual <= opts.feasibility_tol;
    let generic_witness = state_from_real(&engine.rho)?;
    debug_assert!(
        (engine.value - generic_witness.concurrence()).abs() < 1e-9,
        "factor-path and state-path concurrence disagree"
    );

    let analytic = result_from_state(witness_x, &cs, Method::Analytic, 0, true);
    if generic_feasible {
        let generic = result_from_state(
            generic_witness,
            &cs,
            Method::Gradient,
            engine.iterations,
            engine.converged,
        );
        if generic.value < analytic.value - 1e-12 {
            return Ok(generic);
        }
    }
    let mut result = analytic;
    result.value = analytic_value;
    result.iterations = engine.iterations;
    Ok(result)
}

/// Effective entanglement from (x, z): fix the ad-maximizing populations,
/// then minimize over the unknown off-diagonals.
pub fn eff_xz(x: f64, z: f64, opts: &MinimizeOpts) -> Result<MinimizationResult, EffentError> {
    let t = maximize_ad_xz(x, z)?;
    eff_fixed_entries(t.a, t.b, t.c, t.d, t.reh, opts)
}

/// Effective entanglement from the full setup: all populations and Re h
/// known.
pub fn eff_full(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    reh: f64,
    opts: &MinimizeOpts,
) -> Result<MinimizationResult, EffentError> {
    const SLACK: f64 = 1e-9;
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if !(-SLACK..=1.0 + SLACK).contains(&v) {
            return Err(EffentError::Infeasible(format!(
                "population {name} = {v} outside [0, 1]"
            )));
        }
    }
    let sum = a + b + c + d;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(EffentError::Infeasible(format!(
            "populations sum to {sum}, expected 1"
        )));
    }
    if reh * reh > b * c + 1e-10 {
        return Err(EffentError::Infeasible(format!(
            "(Re h)² = {} exceeds bc = {}",
            reh * reh,
            b * c
        )));
    }
    let clamp01 = |v: f64| v.clamp(0.0, 1.0);
    let reh = reh.clamp(-(b * c).max(0.0).sqrt(), (b * c).max(0.0).sqrt());
    eff_fixed_entries(clamp01(a), clamp01(b), clamp01(c), clamp01(d), reh, opts)
}

/// Generic minimization over an arbitrary constraint set.
///
/// Real-restricted sets run the gradient engine on the Gram-factor
/// parameterization; unrestricted sets run a derivative-free search over
/// complex factors. Returns `converged = false` with the best-so-far when
/// the stall criterion was not met; errors only on infeasible sets.
pub fn min_concurrence(
    cs: &ConstraintSet,
    opts: &MinimizeOpts,
) -> Result<MinimizationResult, EffentError> {
    for (i, con) in cs.constraints.iter().enumerate() {
        let herm = (con.operator - con.operator.adjoint()).norm();
        if herm > 1e-12 {
            return Err(EffentError::BadInput(format!(
                "constraint {i} operator is not Hermitian (asymmetry {herm:.2e})"
            )));
        }
    }

    if cs.real_restricted {
        let ops = cs.real_ops();
        let feas = minimize::feasibility_residual(&ops, opts);
        if feas > 1e-5 {
            return Err(EffentError::Infeasible(format!(
                "best achievable constraint violation is {feas:.3e}"
            )));
        }
        let engine = minimize::minimize_real(&ops, opts, None);
        let witness = state_from_real(&engine.rho)?;
        debug_assert!(
            (engine.value - witness.concurrence()).abs() < 1e-9,
            "factor-path and state-path concurrence disagree"
        );
        Ok(result_from_state(
            witness,
            cs,
            Method::Gradient,
            engine.iterations,
            engine.converged,
        ))
    } else {
        let ops: Vec<(Matrix4<C64>, f64)> = cs
            .constraints
            .iter()
            .map(|c| (c.operator, c.target))
            .collect();
        let engine = minimize::minimize_complex(&ops, opts);
        if engine.residual > 1e-4 {
            return Err(EffentError::Infeasible(format!(
                "best achievable constraint violation is {:.3e}",
                engine.residual
            )));
        }
        let witness = TwoQubitState::new(engine.rho)?;
        debug_assert!(
            (engine.value - witness.concurrence()).abs() < 1e-9,
            "factor-path and state-path concurrence disagree"
        );
        Ok(result_from_state(
            witness,
            cs,
            Method::Gradient,
            engine.iterations,
            engine.converged,
        ))
    }
}

/// Dispatch on a record's setup: closed-form recipes for the three standard
/// setups, generic minimization for custom records.
pub fn eff_record(
    record: &MeasurementRecord,
    opts: &MinimizeOpts,
) -> Result<MinimizationResult, EffentError> {
    use crate::measure::SetupLabel;
    record.validate()?;
    match record.setup {
        SetupLabel::ZOnly => Ok(eff_z(record.z.expect("validated"))),
        SetupLabel::XZ => eff_xz(record.x.expect("validated"), record.z.expect("validated"), opts),
        SetupLabel::Full => {
            let (x, y, z, d) = (
                record.x.expect("validated"),
                record.y.expect("validated"),
                record.z.expect("validated"),
                record.d.expect("validated"),
            );
            let [a, b, c, d] = crate::measure::reconstruct_diagonals(x, y, d)
                .map_err(|e| EffentError::Infeasible(e.to_string()))?;
            let reh = crate::measure::reconstruct_reh(x, y, z, d)
                .map_err(|e| EffentError::Infeasible(e.to_string()))?;
            eff_full(a, b, c, d, reh, opts)
        }
        SetupLabel::Custom => {
            let cs = ConstraintSet::from_record(record)?.real_restrict()?;
            min_concurrence(&cs, opts)
        }
    }
}

/// Gram factor of a real state (eigen square root).
fn real_factor(state: &TwoQubitState) -> Matrix4<f64> {
    let re = state.matrix().map(|z| z.re);
    let se = nalgebra::linalg::SymmetricEigen::new(re);
    let mut l = se.eigenvectors;
    for j in 0..4 {
        let s = se.eigenvalues[j].max(0.0).sqrt();
        for i in 0..4 {
            l[(i, j)] *= s;
        }
    }
    l
}

fn state_from_real(rho: &Matrix4<f64>) -> Result<TwoQubitState, EffentError> {
    Ok(TwoQubitState::new(rho.map(|x| C64::new(x, 0.0)))?)
}
