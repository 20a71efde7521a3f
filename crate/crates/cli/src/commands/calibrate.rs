use dqd_qubit::calibration::build_table;
use dqd_qubit::two_level::QubitParams;
use serde::Serialize;

use super::Context;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::CalibrateArgs;

pub fn apply(cfg: &mut RunConfig, a: &CalibrateArgs) -> Result<()> {
    let c = &mut cfg.calibration;
    if let Some(n) = a.tau_ref {
        if n == 0 {
            return Err(CliError::Usage("--tau-ref must be at least 1".into()));
        }
        c.tau_ref = n;
        c.taus.clear();
    }
    if let Some(t) = &a.taus {
        c.taus = t.clone();
    }
    if let Some(m) = a.angles {
        c.angles = m;
    }
    if c.angles == 0 {
        return Err(CliError::Usage("angle grid is empty (--angles 0)".into()));
    }
    if c.tau_grid().is_empty() {
        return Err(CliError::Usage("rise-time grid is empty".into()));
    }
    Ok(())
}

/// `SOURCE_DATE_EPOCH` when set; builds stay byte-identical otherwise.
fn build_timestamp() -> Result<Option<u64>> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("SOURCE_DATE_EPOCH is not an integer: {s:?}"))),
        Err(_) => Ok(None),
    }
}

#[derive(Serialize)]
struct Fig2Row {
    tau: f64,
    angle: f64,
    xi: f64,
    delta_t: f64,
    residual: f64,
    complement: u8,
}

#[derive(Serialize)]
struct Manifest<'a> {
    failures: &'a [dqd_qubit::calibration::CalibrationFailure],
    trend_violations: &'a [String],
}

pub fn run(ctx: &Context) -> Result<()> {
    let c = &ctx.cfg.calibration;
    let params = QubitParams::reduced();
    let taus = c.tau_grid();
    let angles = c.angle_grid();
    let build = build_table(&taus, &angles, &params, &c.ascent())?;
    let mut table = build.table;
    table.build_timestamp = build_timestamp()?;
    table.provenance = ctx.out.meta.pairs();

    let mut json = table.to_json()?;
    json.push('\n');
    if let Some(dir) = ctx
        .table_path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
    {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(&ctx.table_path, json).map_err(|e| CliError::io(&ctx.table_path, e))?;

    let rows = table.entries.iter().map(|e| Fig2Row {
        tau: e.tau,
        angle: e.target_angle,
        xi: e.xi,
        delta_t: e.delta_t,
        residual: e.residual_error,
        complement: e.complement as u8,
    });
    ctx.out.write_csv(
        "fig2.csv",
        &["tau", "angle", "xi", "delta_t", "residual", "complement"],
        rows,
    )?;
    let worst = table
        .entries
        .iter()
        .map(|e| e.residual_error)
        .fold(0.0, f64::max);
    println!(
        "calibrated {} points over {} rise times; worst residual {worst:.3e}",
        table.entries.len(),
        taus.len()
    );
    println!("table: {}", ctx.table_path.display());

    // the axis-symmetry note is informational, everything else is a failure
    let trend: Vec<String> = build
        .warnings
        .into_iter()
        .filter(|w| w.starts_with("tau"))
        .collect();
    if build.failures.is_empty() && trend.is_empty() {
        return Ok(());
    }
    for f in &build.failures {
        eprintln!("failed: {f}");
    }
    for w in &trend {
        eprintln!("trend: {w}");
    }
    let path = ctx.out.write_json(
        "calibration_failures.json",
        &Manifest {
            failures: &build.failures,
            trend_violations: &trend,
        },
    )?;
    Err(CliError::Partial(format!(
        "{} points failed, {} trend violations; see {}",
        build.failures.len(),
        trend.len(),
        path.display()
    )))
}
