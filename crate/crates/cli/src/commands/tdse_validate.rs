use std::f64::consts::TAU;

use dqd_qubit::calibration::calibrate_point;
use dqd_qubit::decomposition::{prepare_from, PrepTarget};
use dqd_qubit::pulse::{ramped_waveform, RiseSpec};
use dqd_qubit::tdse::{
    calibrate_lambda, evolve, evolve_recorded, max_stable_dt, operating_bias_grid, project_logical,
    spectral_pair, stationary_states, DeviceScale, Grid1D, PotentialSpec, Wavefunction1D,
    HBAR2_OVER_2ME, HBAR_MEV_PS,
};
use dqd_qubit::two_level::{state_fidelity, DetuningWaveform, QubitParams, QubitState};
use dqd_qubit::Error as CoreError;
use serde::Serialize;

use super::Context;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::TdseArgs;

pub fn apply(cfg: &mut RunConfig, a: &TdseArgs) {
    let t = &mut cfg.tdse;
    if let Some(f) = a.dt_factor {
        t.dt_factor = f;
    }
    if let Some(b) = a.barrier {
        t.potential.b_height = b;
    }
    if let Some(n) = a.points {
        t.grid.n_points = n;
    }
    if let Some(r) = a.norm_run {
        t.norm_run = r;
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    /// `value < threshold`, or `value >= threshold` for fidelities.
    pub pass: bool,
}

fn below(name: &'static str, value: f64, threshold: f64) -> Check {
    Check {
        name,
        value,
        threshold,
        pass: value < threshold,
    }
}

fn at_least(name: &'static str, value: f64, threshold: f64) -> Check {
    Check {
        name,
        value,
        threshold,
        pass: value >= threshold,
    }
}

#[derive(Debug, Default, Serialize)]
struct Info {
    double_well: bool,
    stability_dt_ps: f64,
    dt_ps: f64,
    gap_mev: f64,
    delta_uev: Option<f64>,
    lambda: Option<f64>,
    harmonic_quantum_mev: Option<f64>,
    norm_run_steps: usize,
    prep_pulses: usize,
}

#[derive(Serialize)]
struct Report {
    checks: Vec<Check>,
    info: Info,
}

/// `ħω` of the quadratic confinement alone.
fn harmonic_quantum(spec: &PotentialSpec) -> f64 {
    (2.0 * spec.a_coef * 2.0 * HBAR2_OVER_2ME / spec.effective_mass).sqrt()
}

fn max_density_change(a: &Wavefunction1D, b: &Wavefunction1D) -> f64 {
    a.density()
        .iter()
        .zip(b.density())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Sign fixed so the leftmost lobe is positive (bonding state positive,
/// antibonding positive on the left).
fn left_positive(psi: &[f64]) -> Vec<f64> {
    let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let first = psi
        .iter()
        .find(|v| v.abs() > 0.01 * peak)
        .copied()
        .unwrap_or(1.0);
    psi.iter().map(|v| v * first.signum()).collect()
}

pub fn run(ctx: &Context) -> Result<()> {
    let t = &ctx.cfg.tdse;
    let (spec, grid) = (t.potential, t.grid);
    let zero_bias = |_: f64| 0.0;
    let limit = max_stable_dt(&spec, &grid, 0.0);
    let dt = t.dt_factor * limit;
    if t.dt_factor > 1.0 {
        return Err(CoreError::Unstable { dt, limit }.into());
    }
    let mut info = Info {
        double_well: spec.is_double_well(),
        stability_dt_ps: limit,
        dt_ps: dt,
        ..Info::default()
    };
    let mut checks = Vec::new();

    let states = stationary_states(&spec, &grid, 6)?;
    ctx.out.write_csv(
        "spectrum.csv",
        &["n", "energy"],
        states.iter().enumerate().map(|(i, s)| (i, s.energy)),
    )?;
    let shown: Vec<Vec<f64>> = states[..4].iter().map(|s| left_positive(&s.psi)).collect();
    ctx.out.write_csv(
        "potential.csv",
        &["x", "potential", "psi0", "psi1", "psi2", "psi3"],
        grid.xs().into_iter().enumerate().map(|(i, x)| {
            (
                x,
                spec.potential(x),
                shown[0][i],
                shown[1][i],
                shown[2][i],
                shown[3][i],
            )
        }),
    )?;
    let gap = states[1].energy - states[0].energy;
    info.gap_mev = gap;

    if spec.b_height == 0.0 {
        let hw = harmonic_quantum(&spec);
        info.harmonic_quantum_mev = Some(hw);
        let rel = (states[0].energy - 0.5 * hw).abs() / (0.5 * hw);
        checks.push(below("harmonic_ground_energy", rel, 1e-3));
    }

    let ground = Wavefunction1D::from_real(&states[0].psi, grid.dx());
    let after = evolve(&ground, &spec, &grid, &zero_bias, 1000.0 * dt, dt)?;
    checks.push(below(
        "stationarity_1000_steps",
        max_density_change(&ground, &after),
        1e-8,
    ));

    if t.norm_run > 0.0 {
        // equal superposition of the two lowest states beats at the gap
        let mix: Vec<f64> = states[0]
            .psi
            .iter()
            .zip(&states[1].psi)
            .map(|(a, b)| (a + b) * std::f64::consts::FRAC_1_SQRT_2)
            .collect();
        let period = TAU * HBAR_MEV_PS / gap;
        let run = evolve_recorded(
            &Wavefunction1D::from_real(&mix, grid.dx()),
            &spec,
            &grid,
            &zero_bias,
            t.norm_run * period,
            dt,
            None,
        )?;
        info.norm_run_steps = run.steps;
        let drift = run.max_norm_drift.max((run.state.norm() - 1.0).abs());
        checks.push(below("norm_drift_full_rotation", drift, 1e-6));
    }

    let unstable = evolve(
        &ground,
        &spec,
        &grid,
        &zero_bias,
        10.0 * 1.01 * limit,
        1.01 * limit,
    );
    checks.push(Check {
        name: "preflight_rejects_unstable_step",
        value: 1.01,
        threshold: 1.0,
        pass: matches!(unstable, Err(CoreError::Unstable { .. })),
    });

    if spec.is_double_well() {
        let bias_grid = operating_bias_grid(&spec, &grid, t.lambda_points, t.lambda_range)?;
        let fit = calibrate_lambda(&spec, &grid, &bias_grid)?;
        info.delta_uev = Some(fit.delta * 1e3);
        info.lambda = Some(fit.lambda);
        checks.push(below("lambda_linearity", fit.linearity_residual, 1e-6));
        ctx.out.write_csv(
            "lambda.csv",
            &["v_bias", "eps", "eps_fit"],
            fit.points.iter().map(|&(v, e)| (v, e, fit.lambda * v)),
        )?;

        let scale = DeviceScale {
            delta: fit.delta,
            lambda: fit.lambda,
        };
        let (fidelity, leakage, pulses) = replay_preparation(ctx, &spec, &grid, &scale)?;
        info.prep_pulses = pulses;
        checks.push(at_least("prep_fidelity", fidelity, 0.999));
        checks.push(below("prep_leakage", leakage, 1e-3));
    }

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    for c in &checks {
        println!(
            "{:<34} {:>14.6e}  threshold {:<8e} {}",
            c.name,
            c.value,
            c.threshold,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    if let (Some(d), Some(l)) = (info.delta_uev, info.lambda) {
        println!("delta {d:.6} ueV, lambda {l:.6}");
    }
    ctx.out
        .write_json("tdse_validation.json", &Report { checks, info })?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Partial(format!(
            "checks failed: {}",
            failed.join(", ")
        )))
    }
}

/// Preparation of |0⟩ from the simulator ground state with calibrated
/// ramped pulses; returns (fidelity, leakage, pulse count).
fn replay_preparation(
    ctx: &Context,
    spec: &PotentialSpec,
    grid: &Grid1D,
    scale: &DeviceScale,
) -> Result<(f64, f64, usize)> {
    let t = &ctx.cfg.tdse;
    let pair = spectral_pair(spec, grid)?;
    let start = Wavefunction1D::from_real(&pair.psi_bonding, pair.dx);
    let (ground, _) = project_logical(&start, &pair);
    let seq = prepare_from(&ground, PrepTarget::Zero)?;
    let params = QubitParams::reduced();
    let rise = RiseSpec::sine(t.prep_tau)?;
    let ascent = ctx.cfg.calibration.ascent();
    let mut w = DetuningWaveform::new();
    for p in &seq.primitives {
        let entry = calibrate_point(t.prep_tau, p.angle, &params, &ascent).map_err(|f| {
            CoreError::NoConvergence {
                what: format!("preparation pulse calibration ({})", f.reason),
                residual: f.best.residual_error,
            }
        })?;
        w.append(&ramped_waveform(p, &rise, &entry, &params)?);
    }
    let (drive, duration) = scale.drive(&w);
    let dt = t.dt_factor * max_stable_dt(spec, grid, scale.bias_for(w.max_abs()));
    let end = evolve(&start, spec, grid, &drive, duration, dt)?;
    let (q, leakage) = project_logical(&end, &pair);
    Ok((state_fidelity(&q, &QubitState::zero())?, leakage, seq.len()))
}
