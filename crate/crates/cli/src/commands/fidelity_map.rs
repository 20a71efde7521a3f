use dqd_qubit::decomposition::RotationSpec;
use dqd_qubit::pulse::train_waveform;
use dqd_qubit::two_level::{
    default_dt, fibonacci_sphere, process_fidelity, realized_unitary, state_fidelity, QubitState,
};

use super::{rise_for, Context};
use crate::error::{CliError, Result};
use crate::parse::{parse_angle, parse_axis};
use crate::MapArgs;

pub fn run(ctx: &Context, a: &MapArgs) -> Result<()> {
    let axis = parse_axis(&a.rotation.axis)?;
    let angle = parse_angle(&a.rotation.angle)?;
    let n = ctx.cfg.rotation.map_points;
    if n == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let tau = ctx.cfg.rotation.tau;
    let (table, params) = ctx.table_for(tau)?;
    let seq = axis.decompose(angle)?;
    let w = train_waveform(&seq, &rise_for(tau)?, &table, &params)?;
    let target = RotationSpec::new(axis.vector(), angle)?.unitary();
    // evolution is linear, so one propagator serves every initial state
    let u = realized_unitary(&w, &params, default_dt(&params))?;

    let mut rows = Vec::with_capacity(n);
    for (theta, phi) in fibonacci_sphere::<f64>(n) {
        let s = QubitState::from_bloch_angles(theta, phi);
        let f = state_fidelity(&target.apply(&s), &u.apply(&s))?;
        rows.push((theta, phi, 1.0 - f));
    }
    ctx.out
        .write_csv("fidelity_map.csv", &["theta", "phi", "error"], &rows)?;
    let worst = rows.iter().map(|r| r.2).fold(f64::MIN, f64::max);
    let best = rows.iter().map(|r| r.2).fold(f64::MAX, f64::min);
    println!("points: {n}");
    println!("process fidelity: {:.12}", process_fidelity(&u, &target)?);
    println!("worst error: {worst:.3e}");
    println!("best error: {best:.3e}");
    Ok(())
}
