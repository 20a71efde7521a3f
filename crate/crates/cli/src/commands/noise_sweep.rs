use dqd_qubit::noise::{
    compare_square_corrected, mean_and_std_error, subdivision_gain, NoiseModel,
};
use serde::Serialize;

use super::{rise_for, Context};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::parse::{parse_angle, parse_axis, AxisArg};
use crate::{NoiseArgs, NoiseMode};

pub fn apply(cfg: &mut RunConfig, a: &NoiseArgs) -> Result<()> {
    if let Some(t) = a.tau {
        cfg.rotation.tau = t;
    }
    if let Some(s) = &a.sigmas {
        cfg.noise.sigmas = s.clone();
    }
    if let Some(n) = a.samples {
        cfg.noise.samples = n;
    }
    if cfg.noise.sigmas.is_empty() {
        return Err(CliError::Usage("noise sigma list is empty".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct GainRow {
    sigma: f64,
    err_square: f64,
    err_corrected: f64,
    gain: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct CompareRow {
    sigma: f64,
    err_square: f64,
    err_corrected: f64,
    stderr_square: f64,
    stderr_corrected: f64,
    /// `err_square − err_corrected` and its paired standard error.
    diff: f64,
    stderr_paired: f64,
}

pub fn run(ctx: &Context, a: &NoiseArgs) -> Result<()> {
    let axis = parse_axis(&a.axis)?;
    let angle = parse_angle(&a.angle)?;
    let n = &ctx.cfg.noise;
    let tau = ctx.cfg.rotation.tau;
    let (table, params) = ctx.table_for(tau)?;
    let model = NoiseModel::new(0.0, ctx.cfg.seed, n.samples)?;
    match a.mode {
        NoiseMode::Gain => {
            if tau == 0.0 {
                return Err(CliError::Usage(
                    "gain mode needs a nonzero rise time".into(),
                ));
            }
            let lab = match axis {
                AxisArg::Lab(v) => v,
                _ => {
                    return Err(CliError::Usage(
                        "gain mode needs a lab axis x, y or z".into(),
                    ))
                }
            };
            let curve = subdivision_gain(lab, angle, tau, &n.sigmas, &model, &table, &params)?;
            let rows: Vec<GainRow> = curve
                .iter()
                .map(|g| GainRow {
                    sigma: g.sigma,
                    err_square: g.err_unsub,
                    err_corrected: g.err_sub,
                    gain: g.gain,
                    stderr: g.stderr,
                })
                .collect();
            ctx.out.write_csv(
                "noise_gain.csv",
                &["sigma", "err_square", "err_corrected", "gain", "stderr"],
                &rows,
            )?;
            println!("pieces: {}", curve.first().map_or(0, |g| g.pieces));
            for g in &curve {
                println!("sigma {:<8} gain {:.4} +- {:.4}", g.sigma, g.gain, g.stderr);
            }
        }
        NoiseMode::Compare => {
            let seq = axis.decompose(angle)?;
            let rise = rise_for(tau)?;
            let mut rows = Vec::with_capacity(n.sigmas.len());
            for &sigma in &n.sigmas {
                let m = model.with_sigma(sigma);
                let (sq, corr) = compare_square_corrected(&seq, &rise, &table, &m, &params)?;
                // paired difference of per-sample infidelities
                let d: Vec<f64> = sq
                    .fidelities
                    .iter()
                    .zip(&corr.fidelities)
                    .map(|(a, b)| b - a)
                    .collect();
                let (diff, se) = mean_and_std_error(&d);
                rows.push(CompareRow {
                    sigma,
                    err_square: sq.mean_infidelity(),
                    err_corrected: corr.mean_infidelity(),
                    stderr_square: sq.fidelity_std_error,
                    stderr_corrected: corr.fidelity_std_error,
                    diff,
                    stderr_paired: if d.len() > 1 { se } else { 0.0 },
                });
            }
            ctx.out.write_csv(
                "noise_compare.csv",
                &[
                    "sigma",
                    "err_square",
                    "err_corrected",
                    "stderr_square",
                    "stderr_corrected",
                    "diff",
                    "stderr_paired",
                ],
                &rows,
            )?;
            for r in &rows {
                println!(
                    "sigma {:<8} square {:.4e} +- {:.1e}  corrected {:.4e} +- {:.1e}  paired diff {:.2e} +- {:.1e}",
                    r.sigma,
                    r.err_square,
                    r.stderr_square,
                    r.err_corrected,
                    r.stderr_corrected,
                    r.diff,
                    r.stderr_paired
                );
            }
        }
    }
    Ok(())
}
