//! Simulator checks against analytic limits and the two-level model.

use dqd_qubit::calibration::{calibrate_point, AscentConfig};
use dqd_qubit::decomposition::{PrimitiveRotation, PulseAxis};
use dqd_qubit::pulse::{ramped_waveform, RiseSpec, REFERENCE_TAUS};
use dqd_qubit::tdse::*;
use dqd_qubit::two_level::{default_dt, propagate, state_fidelity, QubitParams, QubitState};

fn coarse() -> (Grid1D, PotentialSpec, SpectralPair) {
    let g = Grid1D::reference().with_points(512).unwrap();
    let s = PotentialSpec::reference();
    let p = spectral_pair(&s, &g).unwrap();
    (g, s, p)
}

/// Golden-section minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

#[test]
fn well_minima_match_numeric_search() {
    let s = PotentialSpec::reference();
    let (l, r) = s.well_minima().unwrap();
    let xr = golden_min(|x| s.potential(x), 1.0, 230.0);
    let xl = golden_min(|x| s.potential(x), -230.0, -1.0);
    assert!((xr - r).abs() < 1e-6, "{xr} vs {r}");
    assert!((xl - l).abs() < 1e-6);
    let single = PotentialSpec {
        b_height: 0.5 * 2.0 * s.a_coef * s.sigma_width,
        ..s
    };
    assert!(single.well_minima().is_none());
    assert!(golden_min(|x| single.potential(x), -100.0, 100.0).abs() < 1e-6);
}

#[test]
fn spectrum_converges_with_grid() {
    let s = PotentialSpec::reference();
    let g = Grid1D::reference();
    let a = spectral_pair(&s, &g).unwrap();
    let b = spectral_pair(&s, &g.with_points(2048).unwrap()).unwrap();
    assert!((a.e_bonding - b.e_bonding).abs() < 1e-3 * b.e_bonding);
    assert!((a.e_antibonding - b.e_antibonding).abs() < 1e-3 * b.e_antibonding);
}

#[test]
fn pair_is_orthonormal_and_walls_are_quiet() {
    let g = Grid1D::reference();
    let p = spectral_pair(&PotentialSpec::reference(), &g).unwrap();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * p.dx;
    assert!((dot(&p.psi_bonding, &p.psi_bonding) - 1.0).abs() < 1e-10);
    assert!((dot(&p.psi_antibonding, &p.psi_antibonding) - 1.0).abs() < 1e-10);
    assert!(dot(&p.psi_bonding, &p.psi_antibonding).abs() < 1e-10);
    for psi in [&p.psi_bonding, &p.psi_antibonding] {
        assert!(psi[1].powi(2) < 1e-12 && psi[g.n_points - 2].powi(2) < 1e-12);
    }
    assert!((p.gap() - 11.7e-3).abs() < 1e-7, "gap {}", p.gap());
}

#[test]
fn hard_walls_do_not_shift_the_gap() {
    let s = PotentialSpec::reference();
    let g = Grid1D::reference();
    let wide = Grid1D::new(-400.0, 400.0, 1780).unwrap();
    let a = spectral_pair(&s, &g).unwrap().gap();
    let b = spectral_pair(&s, &wide).unwrap().gap();
    assert!(((a - b) / a).abs() < 1e-6);
}

#[test]
fn eigenstate_density_is_static() {
    let (g, s, p) = coarse();
    let wf = Wavefunction1D::from_real(&p.psi_antibonding, p.dx);
    let dt = 0.5 * max_stable_dt(&s, &g, 0.0);
    let e = evolve_recorded(&wf, &s, &g, &|_| 0.0, 1000.0 * dt, dt, None).unwrap();
    assert_eq!(e.steps, 1000);
    let d0 = wf.density();
    let worst = e
        .state
        .density()
        .iter()
        .zip(&d0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
    assert!(e.max_norm_drift < 1e-10);
}

#[test]
fn conserved_norm_under_driving() {
    let (g, s, p) = coarse();
    let wf = p.embed(&QubitState::zero());
    let v = 2.0 * p.gap() / 0.3;
    let bias = move |t: f64| v * (t / 3.0).sin();
    let dt = 0.5 * max_stable_dt(&s, &g, v);
    let e = evolve_recorded(&wf, &s, &g, &bias, 20_000.0 * dt, dt, None).unwrap();
    assert!(e.max_norm_drift < 1e-10, "{}", e.max_norm_drift);
    assert!((e.state.norm() - 1.0).abs() < 1e-6);
}

#[test]
fn time_reversal_recovers_start() {
    let (g, s, p) = coarse();
    let wf = p.embed(&QubitState::zero());
    let v = 3.0 * p.gap() / 0.3;
    let dt = 0.5 * max_stable_dt(&s, &g, v);
    let duration = 1000.0 * dt;
    let bias = move |t: f64| v * (t / (0.3 * duration)).cos();
    let fwd = evolve(&wf, &s, &g, &bias, duration, dt).unwrap();
    let reversed = move |t: f64| bias(duration - t);
    let mut back_in = fwd.conjugate();
    back_in.time = 0.0;
    let back = evolve(&back_in, &s, &g, &reversed, duration, dt)
        .unwrap()
        .conjugate();
    let f = back.fidelity(&wf);
    assert!(f >= 1.0 - 1e-8, "{f}");
}

#[test]
fn free_evolution_mirrors_logical_zero() {
    let (g, s, p) = coarse();
    let zero = p.embed(&QubitState::zero());
    let tx = 2.0 * std::f64::consts::PI * HBAR_MEV_PS / p.gap();
    let dt = max_stable_dt(&s, &g, 0.0);
    let half = evolve(&zero, &s, &g, &|_| 0.0, 0.5 * tx, dt).unwrap();
    let d0 = zero.density();
    let d1 = half.density();
    let n = g.n_points;
    let worst = (0..n)
        .map(|i| (d1[i] - d0[n - 1 - i]).abs())
        .fold(0.0, f64::max);
    let peak = d0.iter().cloned().fold(0.0, f64::max);
    assert!(worst < 1e-3 * peak, "{worst} vs peak {peak}");
    let (q, leak) = project_logical(&half, &p);
    assert!(state_fidelity(&q, &QubitState::one()).unwrap() > 1.0 - 1e-6);
    assert!(leak < 1e-8);
}

#[test]
fn ramped_pulse_tracks_two_level_model() {
    let (g, s, p) = coarse();
    let params = QubitParams::reduced();
    let angle = std::f64::consts::FRAC_PI_2;
    let tau = REFERENCE_TAUS[2];
    let entry = calibrate_point(tau, angle, &params, &AscentConfig::default()).unwrap();
    let prim = PrimitiveRotation::new(PulseAxis::XPrime, angle).unwrap();
    let w = ramped_waveform(&prim, &RiseSpec::sine(tau).unwrap(), &entry, &params).unwrap();
    assert!(w.max_abs() <= 2.0, "outside the lambda operating range");

    let lambda = {
        let grid = operating_bias_grid(&s, &g, 7, 2.0).unwrap();
        calibrate_lambda(&s, &g, &grid).unwrap().lambda
    };
    let scale = DeviceScale {
        delta: p.gap(),
        lambda,
    };
    let (drive, duration) = scale.drive(&w);
    let dt = max_stable_dt(&s, &g, scale.bias_for(w.max_abs()));
    let start = QubitState::zero();
    let run = evolve_recorded(
        &p.embed(&start),
        &s,
        &g,
        &drive,
        duration,
        dt,
        Some(duration / 20.0),
    )
    .unwrap();
    assert!(run.snapshots.len() >= 20);
    let tu = scale.time_unit();
    for snap in &run.snapshots {
        let (q, leak) = project_logical(snap, &p);
        let model = propagate(
            &start,
            &w.truncated(snap.time / tu),
            &params,
            default_dt(&params),
        )
        .unwrap();
        let f = state_fidelity(&q, &model).unwrap();
        assert!(1.0 - f < 1e-3, "t {} infidelity {}", snap.time, 1.0 - f);
        assert!(leak < 1e-3);
    }
}

#[test]
fn lambda_fit_is_linear_and_scales_with_width() {
    let g = Grid1D::reference();
    let s = PotentialSpec::reference();
    let fit = calibrate_lambda(&s, &g, &operating_bias_grid(&s, &g, 11, 2.0).unwrap()).unwrap();
    assert!(fit.linearity_residual < 1e-6);
    let zero = fit.points.iter().find(|(v, _)| *v == 0.0).unwrap();
    assert_eq!(zero.1, 0.0);
    let wide = PotentialSpec {
        half_width: 2.0 * s.half_width,
        ..s
    };
    let fit2 =
        calibrate_lambda(&wide, &g, &operating_bias_grid(&wide, &g, 11, 2.0).unwrap()).unwrap();
    assert!((fit2.lambda - fit.lambda).abs() > 0.1 * fit.lambda);
    assert!(fit2.linearity_residual < 1e-6);
    let single = PotentialSpec { b_height: 0.0, ..s };
    assert!(calibrate_lambda(&single, &g, &[1.0]).is_err());
}

#[test]
fn snapshot_rows_are_consistent() {
    let (g, s, p) = coarse();
    let wf = p.embed(&QubitState::one());
    let rows = snapshot_rows(&wf, &s, &g);
    assert_eq!(rows.len(), g.n_points);
    for r in &rows {
        assert_eq!(r[3], r[1] * r[1] + r[2] * r[2]);
        assert_eq!(r[4], s.potential(r[0]));
    }
}
