//! Statistical properties of the quasistatic noise Monte Carlo.

use dqd_qubit::calibration::{build_table, AscentConfig, CalibrationTable};
use dqd_qubit::decomposition::decompose_y;
use dqd_qubit::noise::*;
use dqd_qubit::pulse::{RiseSpec, REFERENCE_TAUS};
use dqd_qubit::two_level::{
    default_dt, process_fidelity, realized_unitary, BlochVector, DetuningWaveform, QubitParams,
};
use std::f64::consts::PI;

fn reduced() -> QubitParams<f64> {
    QubitParams::reduced()
}

/// Calibrated line at the smallest reference rise time, 16 angles up to 2π.
fn tau0_table(p: &QubitParams<f64>) -> CalibrationTable {
    let angles: Vec<f64> = (1..=16).map(|k| k as f64 * 2.0 * PI / 16.0).collect();
    let b = build_table(&[REFERENCE_TAUS[0]], &angles, p, &AscentConfig::default()).unwrap();
    assert!(b.failures.is_empty());
    b.table
}

fn free_evolution(params: &QubitParams<f64>) -> (DetuningWaveform<f64>, NoiseTarget) {
    let w = DetuningWaveform::constant(0.0, params.t_x());
    let u = realized_unitary(&w, params, default_dt(params)).unwrap();
    (w, NoiseTarget::Unitary(u))
}

#[test]
fn zero_noise_reproduces_noiseless_fidelity_bitwise() {
    let p = reduced();
    let table = tau0_table(&p);
    let y = decompose_y(PI);
    let rise = RiseSpec::sine(REFERENCE_TAUS[0]).unwrap();
    let w = dqd_qubit::pulse::train_waveform(&y, &rise, &table, &p).unwrap();
    let clean = process_fidelity(
        &realized_unitary(&w, &p, default_dt(&p)).unwrap(),
        &y.unitary(),
    )
    .unwrap();
    let m = NoiseModel::new(0.0, 99, 8).unwrap();
    let r = run_noisy(
        offset_factory(&w),
        &NoiseTarget::Unitary(y.unitary()),
        &m,
        &p,
    )
    .unwrap();
    assert!(r.fidelities.iter().all(|f| *f == clean));
    assert_eq!(r.mean_fidelity, clean);
    assert_eq!(r.fidelity_std_error, 0.0);
}

#[test]
fn fixed_seed_runs_are_bit_identical() {
    let p = reduced();
    let (w, target) = free_evolution(&p);
    let m = NoiseModel::new(0.1, 2024, DEFAULT_SAMPLES).unwrap();
    let a = run_noisy(offset_factory(&w), &target, &m, &p).unwrap();
    let b = run_noisy(offset_factory(&w), &target, &m, &p).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn compared_variants_share_draws() {
    let p = reduced();
    let table = tau0_table(&p);
    let rise = RiseSpec::sine(REFERENCE_TAUS[0]).unwrap();
    let m = NoiseModel::new(0.1, 7, 32).unwrap();
    let (sq, corr) = compare_square_corrected(&decompose_y(PI), &rise, &table, &m, &p).unwrap();
    assert_eq!(sq.draws, corr.draws);
    assert_eq!(sq.draws, m.offsets(&p));
    // the standard draws do not depend on sigma
    assert_eq!(m.standard_draws(), m.with_sigma(0.3).standard_draws());
}

#[test]
fn standard_error_halves_when_samples_quadruple() {
    let p = reduced();
    let y = decompose_y(PI);
    let table = CalibrationTable::empty(p);
    let w = dqd_qubit::pulse::train_waveform(&y, &RiseSpec::square(), &table, &p).unwrap();
    let target = NoiseTarget::Unitary(y.unitary());
    let mut ratios = Vec::new();
    for seed in [1u64, 2, 3] {
        let small = NoiseModel::new(0.1, seed, 400).unwrap();
        let large = NoiseModel::new(0.1, seed + 100, 1600).unwrap();
        let a = run_noisy(offset_factory(&w), &target, &small, &p).unwrap();
        let b = run_noisy(offset_factory(&w), &target, &large, &p).unwrap();
        ratios.push(b.fidelity_std_error / a.fidelity_std_error);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 0.5).abs() <= 0.3 * 0.5, "ratios {ratios:?}");
}

/// Mean infidelity at `sigma` over a fixed set of standard draws.
fn mean_infidelity(w: &DetuningWaveform<f64>, target: &NoiseTarget, sigma: f64) -> f64 {
    let m = NoiseModel::new(sigma, 11, 200).unwrap();
    run_noisy(offset_factory(w), target, &m, &reduced())
        .unwrap()
        .mean_infidelity()
}

#[test]
fn free_evolution_is_first_order_insensitive() {
    let p = reduced();
    let (free, free_target) = free_evolution(&p);
    // a detuned wait of one full precession period at eps = delta
    let biased = DetuningWaveform::constant(p.delta, p.t_x() / 2f64.sqrt());
    let biased_target =
        NoiseTarget::Unitary(realized_unitary(&biased, &p, default_dt(&p)).unwrap());
    let h = 2e-3;
    let f1 = mean_infidelity(&free, &free_target, h);
    let f2 = mean_infidelity(&free, &free_target, 2.0 * h);
    let b1 = mean_infidelity(&biased, &biased_target, h);
    let b2 = mean_infidelity(&biased, &biased_target, 2.0 * h);
    // quartic at the sweet spot, quadratic away from it
    assert!((f2 / f1 - 16.0).abs() < 1.0, "free ratio {}", f2 / f1);
    assert!((b2 / b1 - 4.0).abs() < 0.25, "biased ratio {}", b2 / b1);
    // slope at sigma -> 0 is far below the biased one
    assert!(f1 / h < 1e-3 * b1 / h);
}

#[test]
fn z_subdivision_brings_no_gain() {
    let p = reduced();
    let table = tau0_table(&p);
    let m = NoiseModel::new(0.0, 2024, DEFAULT_SAMPLES).unwrap();
    let curve = subdivision_gain(
        BlochVector::z(),
        1.5 * PI,
        REFERENCE_TAUS[0],
        &[0.0, 0.1, 0.2],
        &m,
        &table,
        &p,
    )
    .unwrap();
    assert_eq!(curve[0].gain, 1.0);
    assert_eq!(curve[0].stderr, 0.0);
    for g in &curve[1..] {
        assert!(g.pieces > 1);
        assert!(g.gain < 1.0 + 2.0 * g.stderr, "{g:?}");
    }
}

#[test]
fn infeasible_subdivision_is_an_error() {
    let p = reduced();
    let table = CalibrationTable::empty(p);
    let m = NoiseModel::new(0.1, 1, 4).unwrap();
    let r = subdivision_gain(
        BlochVector::x(),
        0.2,
        REFERENCE_TAUS[4],
        &[0.1],
        &m,
        &table,
        &p,
    );
    assert!(r.is_err());
}
