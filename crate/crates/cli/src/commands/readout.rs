use dqd_qubit::readout::{
    calibrate_readout, dot_boundary, estimate_amplitudes, measure_p_right, ReadoutCalibration,
};
use dqd_qubit::tdse::spectral_pair;
use serde::Serialize;

use super::Context;
use crate::config::RunConfig;
use crate::error::Result;
use crate::parse::parse_state;
use crate::ReadoutArgs;

const DEFAULT_STATES: [&str; 6] = ["0", "1", "+", "-", "+i", "-i"];

pub fn apply(cfg: &mut RunConfig, a: &ReadoutArgs) {
    let p = &mut cfg.tdse.potential;
    if let Some(b) = a.barrier {
        p.b_height = b;
    }
    if let Some(s) = a.asymmetry {
        p.asymmetry = s;
    }
}

#[derive(Serialize)]
struct StateRow {
    state: String,
    beta_sq: f64,
    p_right: f64,
    beta_sq_estimate: f64,
    alpha_sq_estimate: f64,
    error: f64,
    out_of_range: bool,
}

#[derive(Serialize)]
struct Report {
    calibration: ReadoutCalibration,
    error_bound: f64,
    states: Vec<StateRow>,
}

pub fn run(ctx: &Context, a: &ReadoutArgs) -> Result<()> {
    let t = &ctx.cfg.tdse;
    let (spec, grid) = (t.potential, t.grid);
    let pair = spectral_pair(&spec, &grid)?;
    let split = dot_boundary(&spec, &grid);
    let cal = calibrate_readout(&pair, &grid, split);

    let labels = DEFAULT_STATES
        .iter()
        .map(|s| s.to_string())
        .chain(a.states.iter().cloned());
    let mut rows = Vec::new();
    let mut bound = 0.0;
    for label in labels {
        let q = parse_state(&label)?;
        let p_right = measure_p_right(&pair.embed(&q), &grid, split);
        let est = estimate_amplitudes(p_right, &cal)?;
        bound = est.error_bound;
        let beta_sq = q.a1.norm_sqr();
        rows.push(StateRow {
            state: label,
            beta_sq,
            p_right,
            beta_sq_estimate: est.beta_sq_estimate,
            alpha_sq_estimate: est.alpha_sq_estimate,
            error: (est.beta_sq_estimate - beta_sq).abs(),
            out_of_range: est.out_of_range,
        });
    }

    println!("dot boundary: {split} nm");
    println!("P_0R = {:.6e}  P_1R = {:.9}", cal.p0r, cal.p1r);
    println!("eta = {:.3e}  error bound = {bound:.3e}", cal.eta);
    for r in &rows {
        println!(
            "state {:<10} |beta|^2 {:.6}  estimate {:.6}  error {:.2e}",
            r.state, r.beta_sq, r.beta_sq_estimate, r.error
        );
    }
    ctx.out.write_json(
        "readout.json",
        &Report {
            calibration: cal,
            error_bound: bound,
            states: rows,
        },
    )?;
    Ok(())
}
