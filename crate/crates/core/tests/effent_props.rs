//! Properties of the effective-entanglement minimizers that tie the whole
//! pipeline together: information monotonicity, witness validity, the
//! real-part reduction, and separability detection.

use dqdsim_core::measure::{observe, record, SetConfiguration, SetupLabel};
use dqdsim_core::{
    eff_full, eff_record, eff_xz, eff_z, min_concurrence, ConstraintSet, MinimizeOpts,
    TwoQubitState,
};

fn fast_opts() -> MinimizeOpts {
    MinimizeOpts {
        restarts: 6,
        ..Default::default()
    }
}

fn observables(rho: &TwoQubitState) -> (f64, f64, f64, f64) {
    (
        observe(rho, SetConfiguration::ALower),
        observe(rho, SetConfiguration::AUpper),
        observe(rho, SetConfiguration::BMidpoint),
        observe(rho, SetConfiguration::CExcitonCount),
    )
}

#[test]
fn information_monotonicity_chain() {
    let opts = fast_opts();
    for seed in 0..40u64 {
        let rho = TwoQubitState::random_state(seed);
        let (x, y, z, d) = observables(&rho);
        let e_z = eff_z(z).value;
        let e_xz = eff_xz(x, z, &opts).unwrap().value;
        let [a, b, c, dd] = rho.diagonals();
        let e_full = eff_full(a, b, c, dd, rho.h().re, &opts).unwrap().value;
        let c_re = rho.real_part().concurrence();
        let c_full = rho.concurrence();
        let _ = y;
        assert!(e_z <= e_xz + 1e-4, "seed {seed}: {e_z} > {e_xz}");
        assert!(e_xz <= e_full + 2e-4, "seed {seed}: {e_xz} > {e_full}");
        assert!(e_full <= c_re + 3e-4, "seed {seed}: {e_full} > {c_re}");
        assert!(c_re <= c_full + 3e-4, "seed {seed}: {c_re} > {c_full}");
    }
}

#[test]
fn witnesses_reproduce_their_records() {
    let opts = fast_opts();
    for seed in 0..30u64 {
        let rho = TwoQubitState::random_state(seed);
        for setup in [SetupLabel::ZOnly, SetupLabel::XZ, SetupLabel::Full] {
            let rec = record(&rho, setup);
            let res = eff_record(&rec, &opts).unwrap();
            for (obs, target) in rec.present() {
                let config = match obs.label() {
                    "x" => SetConfiguration::ALower,
                    "y" => SetConfiguration::AUpper,
                    "z" => SetConfiguration::BMidpoint,
                    "d" => SetConfiguration::CExcitonCount,
                    _ => SetConfiguration::CVacuum,
                };
                let got = observe(&res.witness, config);
                assert!(
                    (got - target).abs() < 1e-6,
                    "seed {seed} {setup:?} {}: witness gives {got}, record {target}",
                    obs.label()
                );
            }
            assert!(
                (res.witness.concurrence() - res.value).abs() < 1e-6,
                "value/witness mismatch"
            );
        }
    }
}

#[test]
fn separable_witness_implies_zero_value() {
    let opts = fast_opts();
    for seed in 0..30u64 {
        let rho = TwoQubitState::random_state(seed);
        for setup in [SetupLabel::ZOnly, SetupLabel::XZ, SetupLabel::Full] {
            let rec = record(&rho, setup);
            let res = eff_record(&rec, &opts).unwrap();
            if res.witness.is_ppt(1e-10) {
                assert!(
                    res.value < 1e-6,
                    "seed {seed} {setup:?}: PPT witness but value {}",
                    res.value
                );
            }
        }
    }
}

#[test]
fn real_restriction_never_above_complex_minimum() {
    // The constraints are conjugation-invariant, so minimizing over real
    // symmetric states must reach at least as low as over complex ones.
    let relaxed = MinimizeOpts {
        restarts: 2,
        max_iters_per_stage: 150,
        ..Default::default()
    };
    let mut checked = 0;
    for seed in 100..175u64 {
        let rho = TwoQubitState::random_state(seed);
        let rec = record(&rho, SetupLabel::XZ);
        let cs = ConstraintSet::from_record(&rec).unwrap();
        let complex_res = match min_concurrence(&cs, &relaxed) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let real_res = min_concurrence(&cs.clone().real_restrict().unwrap(), &relaxed).unwrap();
        assert!(
            real_res.value <= complex_res.value + 2e-3,
            "seed {seed}: real {} > complex {}",
            real_res.value,
            complex_res.value
        );
        checked += 1;
        if checked == 50 {
            break;
        }
    }
    assert!(checked >= 50, "only {checked} records checked");
}

#[test]
fn eff_xz_nonincreasing_along_dephasing_trajectory() {
    // x stays 0.5 while z = 1 + e^{-Γ} decreases with growing Γ.
    let opts = fast_opts();
    let mut prev = f64::INFINITY;
    for i in 0..=24 {
        let gamma = 3.0 * i as f64 / 24.0;
        let z = 1.0 + (-gamma).exp();
        let value = eff_xz(0.5, z, &opts).unwrap().value;
        assert!(
            value <= prev + 1e-4,
            "effective entanglement increased along the trajectory: {value} > {prev}"
        );
        prev = value;
    }
}

#[test]
fn generic_minimizer_confirms_fidelity_bound_on_a_grid() {
    let opts = MinimizeOpts {
        restarts: 4,
        ..Default::default()
    };
    for i in 0..=10 {
        let z = 2.0 * i as f64 / 10.0;
        let rec = dqdsim_core::MeasurementRecord {
            setup: SetupLabel::ZOnly,
            x: None,
            y: None,
            z: Some(z),
            d: None,
            a: None,
        };
        let cs = ConstraintSet::from_record(&rec)
            .unwrap()
            .real_restrict()
            .unwrap();
        let res = min_concurrence(&cs, &opts).unwrap();
        let expect = (z - 1.0f64).max(0.0);
        assert!(
            (res.value - expect).abs() < 1e-4,
            "z = {z}: generic {} vs closed form {expect}",
            res.value
        );
    }
}
