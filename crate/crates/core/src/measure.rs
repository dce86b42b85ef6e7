//! Idealized SET measurements: projector pairs for the detector
//! configurations, the derived observables x, y, z, d, a, and the algebraic
//! reconstruction of the knowable density-matrix entries.
//!
//! ```text
//! x = a + b              SET at the lower dot
//! y = a + c              SET at the upper dot
//! z = b + c + 2 Re h     SET at the midpoint, z = 2⟨+|ρ|+⟩ ∈ [0, 2]
//! d = ⟨11|ρ|11⟩          distant SET counting excitons
//! a = ⟨00|ρ|00⟩          same SET, vacuum-biased mode
//! ```
//!
//! Measurement is noiseless with ideal projectors; finite measurement time
//! and outcome uncertainty are out of scope.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::state::TwoQubitState;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("observable {name} = {value} outside its range [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("record is missing observable {0} required by its setup")]
    MissingObservable(&'static str),
    #[error("record carries observable {0} not part of its setup")]
    ExtraObservable(&'static str),
    #[error("no physical state matches the record: {0}")]
    InfeasibleRecord(String),
    #[error("record parse error: {0}")]
    Parse(String),
}

/// SET detector configurations and their projector pairs (P_n, P_e).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetConfiguration {
    /// SET next to the lower dot: P_n = |0⟩⟨0|⊗I. Reads x.
    ALower,
    /// SET next to the upper dot: P_n = I⊗|0⟩⟨0|. Reads y.
    AUpper,
    /// SET at the midpoint: P_n = |−⟩⟨−|, P_e = |+⟩⟨+|. Reads z = 2Tr(P_e ρ).
    BMidpoint,
    /// Distant SET biased to the exciton count: P_e = |11⟩⟨11|. Reads d.
    CExcitonCount,
    /// Distant SET biased to the vacuum: P_e = |00⟩⟨00|. Reads a.
    CVacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Observable {
    X,
    Y,
    Z,
    D,
    A,
}

impl Observable {
    pub fn label(self) -> &'static str {
        match self {
            Observable::X => "x",
            Observable::Y => "y",
            Observable::Z => "z",
            Observable::D => "d",
            Observable::A => "a",
        }
    }

    pub fn range(self) -> (f64, f64) {
        match self {
            Observable::Z => (0.0, 2.0),
            _ => (0.0, 1.0),
        }
    }

    /// The Hermitian operator with Tr(Mρ) equal to the observable.
    pub fn operator(self) -> Matrix4<C64> {
        let mut m: Matrix4<C64> = Matrix4::zeros();
        let one = C64::new(1.0, 0.0);
        match self {
            Observable::X => {
                m[(0, 0)] = one;
                m[(1, 1)] = one;
            }
            Observable::Y => {
                m[(0, 0)] = one;
                m[(2, 2)] = one;
            }
            Observable::Z => {
                m[(1, 1)] = one;
                m[(2, 2)] = one;
                m[(1, 2)] = one;
                m[(2, 1)] = one;
            }
            Observable::D => m[(3, 3)] = one,
            Observable::A => m[(0, 0)] = one,
        }
        m
    }
}

fn proj(kets: &[[C64; 4]]) -> Matrix4<C64> {
    let mut m: Matrix4<C64> = Matrix4::zeros();
    for ket in kets {
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += ket[i] * ket[j].conj();
            }
        }
    }
    m
}

fn basis_ket(i: usize) -> [C64; 4] {
    let mut k = [C64::new(0.0, 0.0); 4];
    k[i] = C64::new(1.0, 0.0);
    k
}

fn bell_ket(sign: f64) -> [C64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
        C64::new(sign * s, 0.0),
        C64::new(0.0, 0.0),
    ]
}

impl SetConfiguration {
    pub const ALL: [SetConfiguration; 5] = [
        SetConfiguration::ALower,
        SetConfiguration::AUpper,
        SetConfiguration::BMidpoint,
        SetConfiguration::CExcitonCount,
        SetConfiguration::CVacuum,
    ];

    /// Projector pair (P_n, P_e). For the A and C configurations the pair
    /// resolves the identity; for B it resolves the single-exciton subspace.
    pub fn projector_pair(self) -> (Matrix4<C64>, Matrix4<C64>) {
        match self {
            SetConfiguration::ALower => (
                proj(&[basis_ket(0), basis_ket(1)]),
                proj(&[basis_ket(2), basis_ket(3)]),
            ),
            SetConfiguration::AUpper => (
                proj(&[basis_ket(0), basis_ket(2)]),
                proj(&[basis_ket(1), basis_ket(3)]),
            ),
            SetConfiguration::BMidpoint => (proj(&[bell_ket(-1.0)]), proj(&[bell_ket(1.0)])),
            SetConfiguration::CExcitonCount => (
                proj(&[bell_ket(1.0), bell_ket(-1.0), basis_ket(0)]),
                proj(&[basis_ket(3)]),
            ),
            SetConfiguration::CVacuum => (
                proj(&[bell_ket(1.0), bell_ket(-1.0), basis_ket(3)]),
                proj(&[basis_ket(0)]),
            ),
        }
    }

    pub fn observable(self) -> Observable {
        match self {
            SetConfiguration::ALower => Observable::X,
            SetConfiguration::AUpper => Observable::Y,
            SetConfiguration::BMidpoint => Observable::Z,
            SetConfiguration::CExcitonCount => Observable::D,
            SetConfiguration::CVacuum => Observable::A,
        }
    }

    /// The documented projector combination for this configuration.
    pub fn measure_via_projectors(self, rho: &TwoQubitState) -> f64 {
        let (p_n, p_e) = self.projector_pair();
        let tr = |m: Matrix4<C64>| (m * rho.matrix()).trace().re;
        match self {
            SetConfiguration::ALower | SetConfiguration::AUpper => tr(p_n),
            SetConfiguration::BMidpoint => 2.0 * tr(p_e),
            SetConfiguration::CExcitonCount | SetConfiguration::CVacuum => tr(p_e),
        }
    }
}

/// Observable value from named matrix entries.
pub fn observe(rho: &TwoQubitState, config: SetConfiguration) -> f64 {
    match config {
        SetConfiguration::ALower => rho.a() + rho.b(),
        SetConfiguration::AUpper => rho.a() + rho.c(),
        SetConfiguration::BMidpoint => rho.b() + rho.c() + 2.0 * rho.h().re,
        SetConfiguration::CExcitonCount => rho.d(),
        SetConfiguration::CVacuum => rho.a(),
    }
}

/// Which observables a measurement setup provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetupLabel {
    /// Both A configurations plus C (exciton count) plus B: x, y, z, d.
    Full,
    /// One A configuration plus B: x, z.
    XZ,
    /// B only: z.
    ZOnly,
    /// Anything else; whichever observables are present constrain the state.
    Custom,
}

impl SetupLabel {
    pub fn label(self) -> &'static str {
        match self {
            SetupLabel::Full => "full",
            SetupLabel::XZ => "xz",
            SetupLabel::ZOnly => "z_only",
            SetupLabel::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self, MeasureError> {
        match s {
            "full" => Ok(SetupLabel::Full),
            "xz" => Ok(SetupLabel::XZ),
            "z_only" => Ok(SetupLabel::ZOnly),
            "custom" => Ok(SetupLabel::Custom),
            other => Err(MeasureError::Parse(format!("unknown setup label `{other}`"))),
        }
    }

    fn required(self) -> &'static [Observable] {
        match self {
            SetupLabel::Full => &[Observable::X, Observable::Y, Observable::Z, Observable::D],
            SetupLabel::XZ => &[Observable::X, Observable::Z],
            SetupLabel::ZOnly => &[Observable::Z],
            SetupLabel::Custom => &[],
        }
    }
}

/// The outcomes of one measurement setup.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub setup: SetupLabel,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    pub d: Option<f64>,
    pub a: Option<f64>,
}

impl MeasurementRecord {
    pub fn get(&self, obs: Observable) -> Option<f64> {
        match obs {
            Observable::X => self.x,
            Observable::Y => self.y,
            Observable::Z => self.z,
            Observable::D => self.d,
            Observable::A => self.a,
        }
    }

    fn set(&mut self, obs: Observable, value: Option<f64>) {
        match obs {
            Observable::X => self.x = value,
            Observable::Y => self.y = value,
            Observable::Z => self.z = value,
            Observable::D => self.d = value,
            Observable::A => self.a = value,
        }
    }

    pub fn present(&self) -> Vec<(Observable, f64)> {
        [
            Observable::X,
            Observable::Y,
            Observable::Z,
            Observable::D,
            Observable::A,
        ]
        .into_iter()
        .filter_map(|o| self.get(o).map(|v| (o, v)))
        .collect()
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        for (obs, value) in self.present() {
            let (lo, hi) = obs.range();
            if !(lo..=hi).contains(&value) {
                return Err(MeasureError::OutOfRange {
                    name: obs.label(),
                    value,
                    lo,
                    hi,
                });
            }
        }
        if self.setup != SetupLabel::Custom {
            for &obs in self.setup.required() {
                if self.get(obs).is_none() {
                    return Err(MeasureError::MissingObservable(obs.label()));
                }
            }
            for (obs, _) in self.present() {
                if !self.setup.required().contains(&obs) {
                    return Err(MeasureError::ExtraObservable(obs.label()));
                }
            }
        }
        Ok(())
    }

    /// Clamp every present observable into its declared range. Returns a
    /// description of each change made; the caller decides whether to warn.
    pub fn project_feasible(&mut self) -> Vec<String> {
        let mut notes = Vec::new();
        for (obs, value) in self.present() {
            let (lo, hi) = obs.range();
            let clipped = value.clamp(lo, hi);
            if clipped != value {
                notes.push(format!(
                    "clipped {} from {value} to {clipped}",
                    obs.label()
                ));
                self.set(obs, Some(clipped));
            }
        }
        notes
    }

    /// One CSV line `setup,x,y,z,d,a` with empty fields for unmeasured
    /// observables.
    pub fn to_csv_line(&self) -> String {
        let field = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.setup.label(),
            field(self.x),
            field(self.y),
            field(self.z),
            field(self.d),
            field(self.a)
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self, MeasureError> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(MeasureError::Parse(format!(
                "expected 6 fields `setup,x,y,z,d,a`, got {}",
                fields.len()
            )));
        }
        let setup = SetupLabel::parse(fields[0])?;
        let num = |s: &str, name: &'static str| -> Result<Option<f64>, MeasureError> {
            let s = s.trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|e| MeasureError::Parse(format!("field {name}: {e}")))
        };
        let record = Self {
            setup,
            x: num(fields[1], "x")?,
            y: num(fields[2], "y")?,
            z: num(fields[3], "z")?,
            d: num(fields[4], "d")?,
            a: num(fields[5], "a")?,
        };
        record.validate()?;
        Ok(record)
    }
}

/// Measure the observables of a setup on a state.
pub fn record(rho: &TwoQubitState, setup: SetupLabel) -> MeasurementRecord {
    let mut rec = MeasurementRecord {
        setup,
        x: None,
        y: None,
        z: None,
        d: None,
        a: None,
    };
    let configs: &[SetConfiguration] = match setup {
        SetupLabel::Full => &[
            SetConfiguration::ALower,
            SetConfiguration::AUpper,
            SetConfiguration::BMidpoint,
            SetConfiguration::CExcitonCount,
        ],
        SetupLabel::XZ => &[SetConfiguration::ALower, SetConfiguration::BMidpoint],
        SetupLabel::ZOnly => &[SetConfiguration::BMidpoint],
        SetupLabel::Custom => &[],
    };
    for &config in configs {
        rec.set(config.observable(), Some(observe(rho, config)));
    }
    rec
}

const DIAG_SLACK: f64 = 1e-12;

/// Invert x = a+b, y = a+c, trace = 1 for the four populations:
/// a = x+y+d−1, b = 1−y−d, c = 1−x−d.
pub fn reconstruct_diagonals(x: f64, y: f64, d: f64) -> Result<[f64; 4], MeasureError> {
    let a = x + y + d - 1.0;
    let b = 1.0 - y - d;
    let c = 1.0 - x - d;
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if !(-DIAG_SLACK..=1.0 + DIAG_SLACK).contains(&v) {
            return Err(MeasureError::InfeasibleRecord(format!(
                "reconstructed population {name} = {v} outside [0, 1]"
            )));
        }
    }
    Ok([a, b, c, d])
}

/// Re h = (x+y+z)/2 + d − 1, with the PSD check (Re h)² ≤ bc.
pub fn reconstruct_reh(x: f64, y: f64, z: f64, d: f64) -> Result<f64, MeasureError> {
    let [_, b, c, _] = reconstruct_diagonals(x, y, d)?;
    let reh = (x + y + z) / 2.0 + d - 1.0;
    if reh * reh > b * c + 1e-10 {
        return Err(MeasureError::InfeasibleRecord(format!(
            "(Re h)² = {} exceeds bc = {}",
            reh * reh,
            b * c
        )));
    }
    Ok(reh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{BellSign, TwoQubitState};
    use approx::assert_abs_diff_eq;

    #[test]
    fn projectors_are_projectors() {
        for config in SetConfiguration::ALL {
            let (p_n, p_e) = config.projector_pair();
            for p in [p_n, p_e] {
                assert!((p * p - p).norm() < 1e-14, "not idempotent: {config:?}");
                assert!((p.adjoint() - p).norm() < 1e-14, "not Hermitian: {config:?}");
            }
            // P_n + P_e resolves the identity on the spanned subspace
            let sum = p_n + p_e;
            assert!((sum * sum - sum).norm() < 1e-14);
        }
        // A and C configurations resolve the full identity
        for config in [
            SetConfiguration::ALower,
            SetConfiguration::AUpper,
            SetConfiguration::CExcitonCount,
            SetConfiguration::CVacuum,
        ] {
            let (p_n, p_e) = config.projector_pair();
            assert!((p_n + p_e - Matrix4::identity()).norm() < 1e-14);
        }
    }

    #[test]
    fn bell_state_observables() {
        let plus = TwoQubitState::bell_state(BellSign::Plus);
        assert_abs_diff_eq!(observe(&plus, SetConfiguration::ALower), 0.5);
        assert_abs_diff_eq!(observe(&plus, SetConfiguration::BMidpoint), 2.0);
        let minus = TwoQubitState::bell_state(BellSign::Minus);
        assert_abs_diff_eq!(observe(&minus, SetConfiguration::ALower), 0.5);
        assert_abs_diff_eq!(observe(&minus, SetConfiguration::BMidpoint), 0.0);
    }

    #[test]
    fn vacuum_observables() {
        let vac = TwoQubitState::from_diagonal([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(observe(&vac, SetConfiguration::ALower), 1.0);
        assert_abs_diff_eq!(observe(&vac, SetConfiguration::AUpper), 1.0);
        assert_abs_diff_eq!(observe(&vac, SetConfiguration::BMidpoint), 0.0);
        assert_abs_diff_eq!(observe(&vac, SetConfiguration::CExcitonCount), 0.0);
        assert_abs_diff_eq!(observe(&vac, SetConfiguration::CVacuum), 1.0);
    }

    #[test]
    fn entries_and_projectors_agree() {
        for seed in 0..50u64 {
            let rho = TwoQubitState::random_state(seed);
            for config in SetConfiguration::ALL {
                let via_entries = observe(&rho, config);
                let via_proj = config.measure_via_projectors(&rho);
                assert_abs_diff_eq!(via_entries, via_proj, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn observable_operators_match_observe() {
        for seed in 0..20u64 {
            let rho = TwoQubitState::random_state(seed);
            for (config, obs) in [
                (SetConfiguration::ALower, Observable::X),
                (SetConfiguration::AUpper, Observable::Y),
                (SetConfiguration::BMidpoint, Observable::Z),
                (SetConfiguration::CExcitonCount, Observable::D),
                (SetConfiguration::CVacuum, Observable::A),
            ] {
                let via_op = (obs.operator() * rho.matrix()).trace().re;
                assert_abs_diff_eq!(via_op, observe(&rho, config), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn record_contents_match_setup() {
        let plus = TwoQubitState::bell_state(BellSign::Plus);
        let z_only = record(&plus, SetupLabel::ZOnly);
        assert_eq!(z_only.present().len(), 1);
        assert_abs_diff_eq!(z_only.z.unwrap(), 2.0);
        z_only.validate().unwrap();

        let full = record(&plus, SetupLabel::Full);
        assert_abs_diff_eq!(full.x.unwrap(), 0.5);
        assert_abs_diff_eq!(full.y.unwrap(), 0.5);
        assert_abs_diff_eq!(full.z.unwrap(), 2.0);
        assert_abs_diff_eq!(full.d.unwrap(), 0.0);
        assert!(full.a.is_none());
        full.validate().unwrap();
    }

    #[test]
    fn observables_stay_in_range_on_random_states() {
        for seed in 0..200u64 {
            let rho = TwoQubitState::random_state(seed);
            let rec = record(&rho, SetupLabel::Full);
            rec.validate().unwrap();
        }
    }

    #[test]
    fn separable_states_have_z_at_most_one() {
        let mut checked = 0;
        for seed in 0..400u64 {
            let rho = TwoQubitState::random_state(seed);
            if rho.is_ppt(1e-12) {
                let z = observe(&rho, SetConfiguration::BMidpoint);
                assert!(z <= 1.0 + 1e-9, "separable state with z = {z}");
                checked += 1;
            }
        }
        assert!(checked > 20, "PPT sample too small: {checked}");
    }

    #[test]
    fn reconstruction_anchors() {
        assert_eq!(
            reconstruct_diagonals(0.5, 0.5, 0.0).unwrap(),
            [0.0, 0.5, 0.5, 0.0]
        );
        assert_eq!(
            reconstruct_diagonals(1.0, 1.0, 0.0).unwrap(),
            [1.0, 0.0, 0.0, 0.0]
        );
        assert_abs_diff_eq!(reconstruct_reh(0.5, 0.5, 2.0, 0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(reconstruct_reh(0.5, 0.5, 0.0, 0.0).unwrap(), -0.5);
    }

    #[test]
    fn reconstruction_round_trips_on_random_states() {
        for seed in 0..100u64 {
            let rho = TwoQubitState::random_state(seed);
            let x = observe(&rho, SetConfiguration::ALower);
            let y = observe(&rho, SetConfiguration::AUpper);
            let z = observe(&rho, SetConfiguration::BMidpoint);
            let d = observe(&rho, SetConfiguration::CExcitonCount);
            let [a, b, c, d2] = reconstruct_diagonals(x, y, d).unwrap();
            assert_abs_diff_eq!(a, rho.a(), epsilon = 1e-12);
            assert_abs_diff_eq!(b, rho.b(), epsilon = 1e-12);
            assert_abs_diff_eq!(c, rho.c(), epsilon = 1e-12);
            assert_abs_diff_eq!(d2, rho.d(), epsilon = 1e-12);
            assert_abs_diff_eq!(
                reconstruct_reh(x, y, z, d).unwrap(),
                rho.h().re,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn infeasible_records_error() {
        // x + y + d - 1 < 0
        assert!(reconstruct_diagonals(0.1, 0.1, 0.0).is_err());
        // (Re h)² > bc: z too large for the populations
        assert!(reconstruct_reh(0.9, 0.9, 1.5, 0.1).is_err());
    }

    #[test]
    fn csv_round_trip_and_empty_fields() {
        let rec = MeasurementRecord {
            setup: SetupLabel::ZOnly,
            x: None,
            y: None,
            z: Some(2.0),
            d: None,
            a: None,
        };
        let line = rec.to_csv_line();
        assert!(line.starts_with("z_only,,,"));
        let back = MeasurementRecord::from_csv_line(&line).unwrap();
        assert_eq!(rec, back);
        // plain literal form also accepted
        let lit = MeasurementRecord::from_csv_line("z_only,,,2,,").unwrap();
        assert_eq!(lit.z, Some(2.0));
    }

    #[test]
    fn setup_mismatch_detected() {
        let mut rec = MeasurementRecord {
            setup: SetupLabel::XZ,
            x: Some(0.5),
            y: None,
            z: Some(1.0),
            d: None,
            a: None,
        };
        rec.validate().unwrap();
        rec.y = Some(0.3);
        assert!(matches!(
            rec.validate(),
            Err(MeasureError::ExtraObservable("y"))
        ));
        rec.y = None;
        rec.z = None;
        assert!(matches!(
            rec.validate(),
            Err(MeasureError::MissingObservable("z"))
        ));
    }

    #[test]
    fn projection_clips_and_reports() {
        let mut rec = MeasurementRecord {
            setup: SetupLabel::Custom,
            x: Some(1.2),
            y: None,
            z: Some(-0.1),
            d: None,
            a: None,
        };
        let notes = rec.project_feasible();
        assert_eq!(notes.len(), 2);
        assert_eq!(rec.x, Some(1.0));
        assert_eq!(rec.z, Some(0.0));
        rec.validate().unwrap();
    }
}
