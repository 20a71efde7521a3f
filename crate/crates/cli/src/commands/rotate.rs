use dqd_qubit::decomposition::{DecompositionResult, PrimitiveRotation, PulseAxis, RotationSpec};
use dqd_qubit::pulse::{subdivide, train_waveform};
use dqd_qubit::tdse::{
    calibrate_lambda, evolve_recorded, max_stable_dt, operating_bias_grid, project_logical,
    snapshot_rows, spectral_pair, DeviceScale,
};
use dqd_qubit::two_level::{
    default_dt, process_fidelity, realized_unitary, state_fidelity, trajectory, DetuningWaveform,
    QubitParams, QubitState,
};
use dqd_qubit::Error as CoreError;
use serde::Serialize;

use super::{rise_for, Context};
use crate::error::{CliError, Result};
use crate::parse::{parse_angle, parse_axis, parse_state, AxisArg};
use crate::RotateArgs;

#[derive(Serialize)]
struct Pulse {
    axis: &'static str,
    angle: f64,
}

fn pulses(d: &DecompositionResult<f64>) -> Vec<Pulse> {
    d.primitives
        .iter()
        .map(|p: &PrimitiveRotation<f64>| Pulse {
            axis: match p.axis {
                PulseAxis::XPrime => "x'",
                PulseAxis::ZPrime => "z'",
            },
            angle: p.angle,
        })
        .collect()
}

#[derive(Serialize)]
struct Summary {
    axis: [f64; 3],
    angle: f64,
    tau: f64,
    initial: [f64; 3],
    pulses: Vec<Pulse>,
    /// Equal pieces when the rotation was subdivided.
    pieces: Option<usize>,
    /// In units of `t_x`.
    duration: f64,
    state_fidelity: f64,
    process_fidelity: f64,
    tdse: Option<TdseSummary>,
}

#[derive(Serialize)]
struct TdseSummary {
    delta_mev: f64,
    lambda: f64,
    dt_ps: f64,
    steps: usize,
    state_fidelity: f64,
    leakage: f64,
    max_norm_drift: f64,
}

fn bloch(s: &QubitState<f64>) -> [f64; 3] {
    let b = s.bloch_vector();
    [b.nx, b.ny, b.nz]
}

pub fn run(ctx: &Context, a: &RotateArgs) -> Result<()> {
    let axis = parse_axis(&a.rotation.axis)?;
    let angle = parse_angle(&a.rotation.angle)?;
    let init = parse_state(&a.init)?;
    let tau = ctx.cfg.rotation.tau;
    let (table, params) = ctx.table_for(tau)?;

    let (seq, pieces) = if a.subdivide {
        let lab = match axis {
            AxisArg::Lab(v) if tau > 0.0 => v,
            _ => {
                return Err(CliError::Usage(
                    "--subdivide needs a lab axis and a nonzero rise time".into(),
                ))
            }
        };
        let sub = subdivide(lab, angle, tau, &params)?;
        (sub.result(), Some(sub.pieces))
    } else {
        (axis.decompose(angle)?, None)
    };
    let w = train_waveform(&seq, &rise_for(tau)?, &table, &params)?;
    let target = RotationSpec::new(axis.vector(), angle)?.unitary();
    let dt = default_dt(&params);
    let tx = params.t_x();

    let traj = trajectory(&init, &w, &params, dt, ctx.cfg.rotation.sample_dt * tx)?;
    let last = traj.last().map(|(_, s)| *s).unwrap_or(init);
    let f_state = state_fidelity(&target.apply(&init), &last)?;
    let f_proc = process_fidelity(&realized_unitary(&w, &params, dt)?, &target)?;

    ctx.out.write_csv(
        "trajectory.csv",
        &["t", "nx", "ny", "nz"],
        traj.iter().map(|(t, s)| {
            let [x, y, z] = bloch(s);
            (t / tx, x, y, z)
        }),
    )?;
    ctx.out.write_csv(
        "pulse.csv",
        &["t", "eps"],
        pulse_profile(&w, &params, ctx.cfg.rotation.sample_dt),
    )?;

    let tdse = if a.tdse {
        Some(replay(ctx, &w, &init, &target.apply(&init), &params)?)
    } else {
        None
    };

    let summary = Summary {
        axis: {
            let v = axis.vector();
            [v.nx, v.ny, v.nz]
        },
        angle,
        tau,
        initial: bloch(&init),
        pulses: pulses(&seq),
        pieces,
        duration: w.duration() / tx,
        state_fidelity: f_state,
        process_fidelity: f_proc,
        tdse,
    };
    ctx.out.write_json("rotate.json", &summary)?;
    println!("pulses: {}", seq.len());
    println!("duration: {:.6} t_x", summary.duration);
    println!("state fidelity: {f_state:.12}");
    println!("process fidelity: {f_proc:.12}");
    if let Some(t) = &summary.tdse {
        println!("simulator fidelity: {:.9}", t.state_fidelity);
        println!("simulator leakage: {:.3e}", t.leakage);
    }
    Ok(())
}

/// `(t / t_x, ε / Δ)` samples, always including both ends.
fn pulse_profile(
    w: &DetuningWaveform<f64>,
    params: &QubitParams<f64>,
    sample_dt: f64,
) -> Vec<(f64, f64)> {
    let tx = params.t_x();
    w.sample(sample_dt * tx)
        .into_iter()
        .map(|(t, e)| (t / tx, e / params.delta))
        .collect()
}

fn replay(
    ctx: &Context,
    w: &DetuningWaveform<f64>,
    init: &QubitState<f64>,
    expected: &QubitState<f64>,
    params: &QubitParams<f64>,
) -> Result<TdseSummary> {
    let t = &ctx.cfg.tdse;
    let (spec, grid) = (t.potential, t.grid);
    let pair = spectral_pair(&spec, &grid)?;
    let bias_grid = operating_bias_grid(&spec, &grid, t.lambda_points, t.lambda_range)?;
    let fit = calibrate_lambda(&spec, &grid, &bias_grid)?;
    let scale = DeviceScale {
        delta: pair.gap(),
        lambda: fit.lambda,
    };
    // waveform units follow the table's gap; the simulator wants Δ = 1
    let g = params.delta;
    let tu = scale.time_unit();
    let drive = |t_ps: f64| scale.bias_for(w.value_at(t_ps / (tu * g)) / g);
    let duration = w.duration() * g * tu;
    let limit = max_stable_dt(&spec, &grid, scale.bias_for(w.max_abs() / g));
    let dt = t.dt_factor * limit;
    if t.dt_factor > 1.0 {
        return Err(CoreError::Unstable { dt, limit }.into());
    }
    let every = if t.snapshot_every > 0.0 {
        t.snapshot_every
    } else {
        duration / 200.0
    };
    let run = evolve_recorded(
        &pair.embed(init),
        &spec,
        &grid,
        &drive,
        duration,
        dt,
        Some(every),
    )?;
    let tx_ps = std::f64::consts::TAU * tu;
    let mut rows = Vec::with_capacity(run.snapshots.len());
    for snap in &run.snapshots {
        let (q, leak) = project_logical(snap, &pair);
        let [x, y, z] = bloch(&q);
        rows.push((snap.time / tx_ps, x, y, z, leak));
    }
    ctx.out.write_csv(
        "tdse_trajectory.csv",
        &["t", "nx", "ny", "nz", "leakage"],
        rows,
    )?;
    ctx.out.write_csv(
        "tdse_snapshot.csv",
        &["x", "re", "im", "density", "potential"],
        snapshot_rows(&run.state, &spec, &grid)
            .into_iter()
            .map(|r| (r[0], r[1], r[2], r[3], r[4])),
    )?;
    let (q, leakage) = project_logical(&run.state, &pair);
    Ok(TdseSummary {
        delta_mev: scale.delta,
        lambda: scale.lambda,
        dt_ps: run.dt,
        steps: run.steps,
        state_fidelity: state_fidelity(&q, expected)?,
        leakage,
        max_norm_drift: run.max_norm_drift,
    })
}
