//! Two-qubit density matrices, Bell states, and the Wootters concurrence.
//!
//! Basis order is fixed everywhere as |00⟩, |01⟩, |10⟩, |11⟩ with the first
//! label belonging to qubit 1 (the lower dot). Named accessors follow the
//! usual letters for this problem:
//!
//! ```text
//!         | a   u   v   g |
//!   rho = | u*  b   h   p |
//!         | v*  h*  c   q |
//!         | g*  p*  q*  d |
//! ```

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Hermiticity tolerance on construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance on construction.
pub const TRACE_TOL: f64 = 1e-12;
/// Allowed negative slack on the smallest eigenvalue. States failing by
/// more are rejected, never silently projected back onto the cone.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("state dump parse error: {0}")]
    DumpParse(String),
}

/// Sign choice of the single-exciton Bell states (|01⟩ ± |10⟩)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellSign {
    Plus,
    Minus,
}

/// σ_y ⊗ σ_y in the product basis (real in this representation).
pub(crate) fn spin_flip_real() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    )
}

fn spin_flip_complex() -> Matrix4<C64> {
    spin_flip_real().map(|x| C64::new(x, 0.0))
}

/// Eigenvalues of a Hermitian 4×4, ascending not guaranteed.
fn hermitian_eigenvalues(m: &Matrix4<C64>) -> Vector4<f64> {
    nalgebra::linalg::SymmetricEigen::new(*m).eigenvalues
}

fn symmetric_eigenvalues(m: &Matrix4<f64>) -> Vector4<f64> {
    nalgebra::linalg::SymmetricEigen::new(*m).eigenvalues
}

/// A validated two-qubit density matrix: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    m: Matrix4<C64>,
}

impl TwoQubitState {
    /// Validate and wrap a matrix. Hermiticity is enforced within
    /// [`HERMITICITY_TOL`] and then symmetrised exactly so that all
    /// downstream algebra sees ρ = ρ†.
    pub fn new(m: Matrix4<C64>) -> Result<Self, StateError> {
        let mut asym: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let diff = m[(i, j)] - m[(j, i)].conj();
                asym = asym.max(diff.norm());
            }
        }
        if asym > HERMITICITY_TOL {
            return Err(StateError::NotHermitian(asym));
        }
        let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let tr = herm.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(StateError::BadTrace(tr));
        }
        let min_eig = hermitian_eigenvalues(&herm)
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_eig < -PSD_TOL {
            return Err(StateError::NotPsd(min_eig));
        }
        Ok(Self { m: herm })
    }

    /// Construction bypass for matrices that are valid by construction
    /// (channel outputs, normalized Gram factors). Debug builds still check.
    pub(crate) fn from_matrix_unchecked(m: Matrix4<C64>) -> Self {
        debug_assert!(Self::new(m).is_ok(), "from_matrix_unchecked got an invalid state");
        Self { m }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    /// Diagonal in basis order: (a, b, c, d).
    pub fn diagonals(&self) -> [f64; 4] {
        [self.a(), self.b(), self.c(), self.d()]
    }

    pub fn a(&self) -> f64 {
        self.m[(0, 0)].re
    }
    pub fn b(&self) -> f64 {
        self.m[(1, 1)].re
    }
    pub fn c(&self) -> f64 {
        self.m[(2, 2)].re
    }
    pub fn d(&self) -> f64 {
        self.m[(3, 3)].re
    }
    /// ⟨01|ρ|10⟩
    pub fn h(&self) -> C64 {
        self.m[(1, 2)]
    }
    /// ⟨00|ρ|11⟩
    pub fn g(&self) -> C64 {
        self.m[(0, 3)]
    }
    /// ⟨00|ρ|01⟩
    pub fn u(&self) -> C64 {
        self.m[(0, 1)]
    }
    /// ⟨00|ρ|10⟩
    pub fn v(&self) -> C64 {
        self.m[(0, 2)]
    }
    /// ⟨01|ρ|11⟩
    pub fn p(&self) -> C64 {
        self.m[(1, 3)]
    }
    /// ⟨10|ρ|11⟩
    pub fn q(&self) -> C64 {
        self.m[(2, 3)]
    }

    /// Pure Bell state (|01⟩ ± |10⟩)/√2.
    pub fn bell_state(sign: BellSign) -> Self {
        let s = match sign {
            BellSign::Plus => 0.5,
            BellSign::Minus => -0.5,
        };
        let mut m = Matrix4::zeros();
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(2, 2)] = C64::new(0.5, 0.0);
        m[(1, 2)] = C64::new(s, 0.0);
        m[(2, 1)] = C64::new(s, 0.0);
        Self { m }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m: Matrix4::identity() * C64::new(0.25, 0.0),
        }
    }

    pub fn from_diagonal(diag: [f64; 4]) -> Result<Self, StateError> {
        let mut m = Matrix4::zeros();
        for (i, v) in diag.into_iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self::new(m)
    }

    /// X-state: diagonal (a, b, c, d) plus anti-diagonal coherences g, h.
    pub fn x_state(a: f64, b: f64, c: f64, d: f64, g: C64, h: C64) -> Result<Self, StateError> {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::new(a, 0.0);
        m[(1, 1)] = C64::new(b, 0.0);
        m[(2, 2)] = C64::new(c, 0.0);
        m[(3, 3)] = C64::new(d, 0.0);
        m[(0, 3)] = g;
        m[(3, 0)] = g.conj();
        m[(1, 2)] = h;
        m[(2, 1)] = h.conj();
        Self::new(m)
    }

    /// Entrywise real part. Always a valid state: Re ρ = (ρ + ρ*)/2 and
    /// ρ* is a state whenever ρ is.
    pub fn real_part(&self) -> Self {
        Self {
            m: self.m.map(|z| C64::new(z.re, 0.0)),
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.m.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.m)
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Peres–Horodecki test: partial transpose over qubit 2 is PSD.
    /// For two qubits this is exactly separability.
    pub fn is_ppt(&self, tol: f64) -> bool {
        let mut pt = Matrix4::zeros();
        for r1 in 0..2 {
            for r2 in 0..2 {
                for c1 in 0..2 {
                    for c2 in 0..2 {
                        pt[(2 * r1 + c2, 2 * c1 + r2)] = self.m[(2 * r1 + r2, 2 * c1 + c2)];
                    }
                }
            }
        }
        hermitian_eigenvalues(&pt).iter().all(|&e| e >= -tol)
    }

    /// Wootters concurrence, clamped to [0, 1].
    ///
    /// With ρ = L L† (L from the eigendecomposition) the spin-flip spectrum
    /// reduces to the singular values of the complex-symmetric 4×4 matrix
    /// Lᵀ (σ_y⊗σ_y) L, which avoids any non-Hermitian eigenproblem:
    /// C = max(0, σ₁ − σ₂ − σ₃ − σ₄).
    pub fn concurrence(&self) -> f64 {
        if self.is_real(1e-15) {
            let re = self.m.map(|z| z.re);
            let se = nalgebra::linalg::SymmetricEigen::new(re);
            let mut l = se.eigenvectors;
            for j in 0..4 {
                let s = se.eigenvalues[j].max(0.0).sqrt();
                for i in 0..4 {
                    l[(i, j)] *= s;
                }
            }
            let d = l.transpose() * spin_flip_real() * l;
            let mut s: [f64; 4] = symmetric_eigenvalues(&d).map(f64::abs).into();
            s.sort_by(|a, b| b.total_cmp(a));
            (s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0)
        } else {
            let se = nalgebra::linalg::SymmetricEigen::new(self.m);
            let mut l = se.eigenvectors;
            for j in 0..4 {
                let s = C64::new(se.eigenvalues[j].max(0.0).sqrt(), 0.0);
                for i in 0..4 {
                    l[(i, j)] *= s;
                }
            }
            let d = l.transpose() * spin_flip_complex() * l;
            // singular values of D via the Hermitian product D†D
            let h = d.adjoint() * d;
            let mut s: [f64; 4] = hermitian_eigenvalues(&h)
                .map(|x| x.max(0.0).sqrt())
                .into();
            s.sort_by(|a, b| b.total_cmp(a));
            (s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0)
        }
    }

    /// Hilbert–Schmidt random density matrix: ρ = G G† / tr(G G†) with
    /// complex Gaussian G, deterministic per seed.
    pub fn random_state(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g: Matrix4<C64> = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                g[(i, j)] = C64::new(re, im);
            }
        }
        let rho = g * g.adjoint();
        let tr = rho.trace().re;
        Self::from_matrix_unchecked(rho / C64::new(tr, 0.0))
    }

    /// Frozen textual dump: 16 lines, row-major, `re,im` per line with 17
    /// significant digits. Consumed by `--dump-state` and golden tests.
    pub fn to_dump_string(&self) -> String {
        let mut out = String::with_capacity(16 * 50);
        for i in 0..4 {
            for j in 0..4 {
                let z = self.m[(i, j)];
                out.push_str(&format!("{:.16e},{:.16e}\n", z.re, z.im));
            }
        }
        out
    }

    pub fn from_dump_string(text: &str) -> Result<Self, StateError> {
        let mut entries = Vec::with_capacity(16);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (re, im) = line
                .split_once(',')
                .ok_or_else(|| StateError::DumpParse(format!("line {}: missing comma", lineno + 1)))?;
            let re: f64 = re
                .trim()
                .parse()
                .map_err(|e| StateError::DumpParse(format!("line {}: {e}", lineno + 1)))?;
            let im: f64 = im
                .trim()
                .parse()
                .map_err(|e| StateError::DumpParse(format!("line {}: {e}", lineno + 1)))?;
            entries.push(C64::new(re, im));
        }
        if entries.len() != 16 {
            return Err(StateError::DumpParse(format!(
                "expected 16 entries, got {}",
                entries.len()
            )));
        }
        let m = Matrix4::from_fn(|i, j| entries[4 * i + j]);
        Self::new(m)
    }
}

/// Closed-form concurrence of an X-state from its entry magnitudes:
/// 2·max(0, |h| − √(ad), |g| − √(bc)).
pub fn x_state_concurrence(a: f64, b: f64, c: f64, d: f64, g_abs: f64, h_abs: f64) -> f64 {
    let t1 = h_abs - (a * d).max(0.0).sqrt();
    let t2 = g_abs - (b * c).max(0.0).sqrt();
    (2.0 * t1.max(t2)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;

    fn werner(p: f64) -> TwoQubitState {
        let bell = TwoQubitState::bell_state(BellSign::Plus);
        let m = bell.matrix() * C64::new(p, 0.0)
            + Matrix4::identity() * C64::new((1.0 - p) / 4.0, 0.0);
        TwoQubitState::new(m).unwrap()
    }

    #[test]
    fn bell_states_are_valid_and_maximally_entangled() {
        for sign in [BellSign::Plus, BellSign::Minus] {
            let s = TwoQubitState::bell_state(sign);
            assert_abs_diff_eq!(s.b(), 0.5);
            assert_abs_diff_eq!(s.c(), 0.5);
            assert_abs_diff_eq!(s.purity(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(s.concurrence(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(TwoQubitState::bell_state(BellSign::Plus).h().re, 0.5);
        assert_abs_diff_eq!(TwoQubitState::bell_state(BellSign::Minus).h().re, -0.5);
    }

    #[test]
    fn maximally_mixed_is_separable() {
        assert_abs_diff_eq!(TwoQubitState::maximally_mixed().concurrence(), 0.0);
    }

    #[test]
    fn werner_closed_form() {
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let expect = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert_abs_diff_eq!(werner(p).concurrence(), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn x_state_closed_form_matches_eigen_routine() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let raw: [f64; 4] = std::array::from_fn(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                x * x
            });
            let sum: f64 = raw.iter().sum();
            let [a, b, c, d] = raw.map(|x| x / sum);
            let unif = |rng: &mut ChaCha8Rng| {
                let x: f64 = StandardNormal.sample(rng);
                (x.sin() + 1.0) / 2.0
            };
            let g_abs = unif(&mut rng) * (b * c).sqrt();
            let h_abs = unif(&mut rng) * (a * d).sqrt();
            // spec'd convention: g couples (00,11) so |g| <= sqrt(ad), h couples (01,10) so |h| <= sqrt(bc)
            let g_abs = g_abs.min((a * d).sqrt());
            let h_abs = h_abs.min((b * c).sqrt());
            let phase_g = unif(&mut rng) * std::f64::consts::TAU;
            let phase_h = unif(&mut rng) * std::f64::consts::TAU;
            let g = C64::from_polar(g_abs, phase_g);
            let h = C64::from_polar(h_abs, phase_h);
            let s = TwoQubitState::x_state(a, b, c, d, g, h).unwrap();
            let expect = x_state_concurrence(a, b, c, d, g_abs, h_abs);
            assert_abs_diff_eq!(s.concurrence(), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn real_part_is_idempotent_and_kills_imaginary_coherence() {
        let r = TwoQubitState::random_state(3);
        let rp = r.real_part();
        assert_eq!(rp.real_part(), rp);

        // (|01> + i|10>)/sqrt(2): real part is the even mixture
        let mut m = Matrix4::zeros();
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(2, 2)] = C64::new(0.5, 0.0);
        m[(1, 2)] = C64::new(0.0, -0.5);
        m[(2, 1)] = C64::new(0.0, 0.5);
        let s = TwoQubitState::new(m).unwrap();
        let sp = s.real_part();
        assert_abs_diff_eq!(sp.b(), 0.5);
        assert_abs_diff_eq!(sp.h().norm(), 0.0);
        assert_abs_diff_eq!(sp.concurrence(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.concurrence(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn real_part_never_increases_concurrence() {
        for seed in 0..1000u64 {
            let s = TwoQubitState::random_state(seed);
            assert!(
                s.real_part().concurrence() <= s.concurrence() + 1e-10,
                "violated at seed {seed}"
            );
        }
    }

    #[test]
    fn concurrence_invariant_under_conjugation() {
        for seed in 0..200u64 {
            let s = TwoQubitState::random_state(seed);
            let conj = TwoQubitState::new(s.matrix().map(|z| z.conj())).unwrap();
            assert_abs_diff_eq!(s.concurrence(), conj.concurrence(), epsilon = 1e-10);
        }
    }

    fn random_unitary2(rng: &mut ChaCha8Rng) -> Matrix2<C64> {
        // Gram-Schmidt on a complex Gaussian 2x2
        let mut g: Matrix2<C64> = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                g[(i, j)] = C64::new(re, im);
            }
        }
        let c0 = g.column(0).into_owned();
        let n0 = (c0.adjoint() * c0)[(0, 0)].re.sqrt();
        let c0 = c0 / C64::new(n0, 0.0);
        let c1 = g.column(1).into_owned();
        let overlap = (c0.adjoint() * c1)[(0, 0)];
        let c1 = c1 - c0 * overlap;
        let n1 = (c1.adjoint() * c1)[(0, 0)].re.sqrt();
        let c1 = c1 / C64::new(n1, 0.0);
        Matrix2::from_columns(&[c0, c1])
    }

    fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
        let mut out = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn concurrence_invariant_under_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..100u64 {
            let s = TwoQubitState::random_state(seed);
            let un = kron2(&random_unitary2(&mut rng), &random_unitary2(&mut rng));
            let rotated = TwoQubitState::new(un * s.matrix() * un.adjoint()).unwrap();
            assert_abs_diff_eq!(s.concurrence(), rotated.concurrence(), epsilon = 1e-9);
        }
    }

    #[test]
    fn concurrence_is_convex_sampled() {
        for seed in 0..100u64 {
            let s1 = TwoQubitState::random_state(2 * seed + 1);
            let s2 = TwoQubitState::random_state(2 * seed + 2);
            for lam in [0.25, 0.5, 0.75] {
                let m = s1.matrix() * C64::new(lam, 0.0) + s2.matrix() * C64::new(1.0 - lam, 0.0);
                let mix = TwoQubitState::new(m).unwrap();
                let bound = lam * s1.concurrence() + (1.0 - lam) * s2.concurrence();
                assert!(mix.concurrence() <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn random_states_are_valid_and_deterministic() {
        let mut purity_sum = 0.0;
        for seed in 0..1000u64 {
            let s = TwoQubitState::random_state(seed);
            assert!(TwoQubitState::new(*s.matrix()).is_ok());
            purity_sum += s.purity();
        }
        let mean = purity_sum / 1000.0;
        assert!(mean > 0.25 && mean < 1.0, "mean purity {mean}");
        assert_eq!(
            TwoQubitState::random_state(42).matrix(),
            TwoQubitState::random_state(42).matrix()
        );
    }

    #[test]
    fn invalid_states_are_rejected() {
        // negative eigenvalue
        let mut m: Matrix4<C64> = Matrix4::zeros();
        m[(0, 0)] = C64::new(1.2, 0.0);
        m[(1, 1)] = C64::new(-0.2, 0.0);
        assert!(matches!(
            TwoQubitState::new(m),
            Err(StateError::NotPsd(_))
        ));
        // bad trace
        let m = Matrix4::identity() * C64::new(0.3, 0.0);
        assert!(matches!(TwoQubitState::new(m), Err(StateError::BadTrace(_))));
        // non-Hermitian
        let mut m = Matrix4::identity() * C64::new(0.25, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(
            TwoQubitState::new(m),
            Err(StateError::NotHermitian(_))
        ));
    }

    #[test]
    fn dump_round_trip() {
        let s = TwoQubitState::random_state(5);
        let text = s.to_dump_string();
        let back = TwoQubitState::from_dump_string(&text).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(
                    (s.matrix()[(i, j)] - back.matrix()[(i, j)]).norm(),
                    0.0,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn pure_bell_is_rank_one() {
        let s = TwoQubitState::bell_state(BellSign::Plus);
        let evs = hermitian_eigenvalues(s.matrix());
        let mut sorted: Vec<f64> = evs.iter().copied().collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        assert_abs_diff_eq!(sorted[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sorted[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ppt_detects_entanglement() {
        assert!(!TwoQubitState::bell_state(BellSign::Plus).is_ppt(1e-12));
        assert!(TwoQubitState::maximally_mixed().is_ppt(1e-12));
        assert!(werner(0.2).is_ppt(1e-12)); // separable below p = 1/3
        assert!(!werner(0.5).is_ppt(1e-12));
    }
}
