//! Core library: phonon-induced pure dephasing of a double-quantum-dot
//! exciton pair, idealized SET charge measurements, and the worst-case
//! ("effective") entanglement consistent with the measured data.
//!
//! Pipeline: [`config`] fixes material/geometry and the unit system →
//! [`phonon`] integrates the dephasing exponents Γ(t, T) → [`channel`]
//! applies the exact pure-dephasing map to an initial state → [`measure`]
//! extracts the SET observables → [`effent`] minimizes the concurrence over
//! every physical state compatible with them.

pub mod channel;
pub mod config;
pub mod effent;
pub mod measure;
pub mod phonon;
pub mod quad;
pub mod state;
pub mod units;

pub use channel::{evolve, evolve_series, ChannelError, EvolutionSeries};
pub use config::{default_gaas, load_config, save_config, ConfigError, SimulationConfig};
pub use effent::{
    brute_force_oracle, eff_full, eff_record, eff_xz, eff_z, maximize_ad_xz, min_concurrence,
    AdMaxTuple, Constraint, ConstraintSet, EffentError, Method, MinimizationResult, MinimizeOpts,
    Residuals,
};
pub use measure::{
    observe, reconstruct_diagonals, reconstruct_reh, record, MeasureError, MeasurementRecord,
    Observable, SetConfiguration, SetupLabel,
};
pub use phonon::{
    build_profile, CoherencePair, DephasingProfile, ExcitonPhononCoupling, PhononError,
};
pub use quad::{GaussLegendre, SpectralGrid};
pub use state::{x_state_concurrence, BellSign, StateError, TwoQubitState};

/// SplitMix64 step: derive independent per-cell seeds from a base seed so
/// that scan results do not depend on worker count or iteration order.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
