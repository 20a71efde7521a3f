pub mod calibrate;
pub mod fidelity_map;
pub mod noise_sweep;
pub mod readout;
pub mod rotate;
pub mod tdse_validate;

use std::path::{Path, PathBuf};

use dqd_qubit::calibration::CalibrationTable;
use dqd_qubit::pulse::RiseSpec;
use dqd_qubit::two_level::QubitParams;

use crate::artifacts::{Meta, OutDir};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::RotationArgs;

pub struct Context {
    pub cfg: RunConfig,
    pub out: OutDir,
    pub table_path: PathBuf,
}

impl Context {
    pub fn new(cfg: RunConfig, command: &str, out: &Path, table: Option<PathBuf>) -> Result<Self> {
        let meta = Meta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_sha256: cfg.hash(),
            seed: cfg.seed,
        };
        let out = OutDir::create(out, meta)?;
        let table_path = table.unwrap_or_else(|| out.path("calibration_table.json"));
        Ok(Self {
            cfg,
            out,
            table_path,
        })
    }

    pub fn load_table(&self) -> Result<CalibrationTable> {
        let text = std::fs::read_to_string(&self.table_path)
            .map_err(|e| CliError::io(&self.table_path, e))?;
        CalibrationTable::from_json(&text)
            .map_err(|e| CliError::Artifact(format!("{}: {e}", self.table_path.display())))
    }

    /// Table and parameters for a run at rise time `tau`. Ideal pulses
    /// need no table.
    pub fn table_for(&self, tau: f64) -> Result<(CalibrationTable, QubitParams<f64>)> {
        if tau == 0.0 {
            let p = QubitParams::reduced();
            return Ok((CalibrationTable::empty(p), p));
        }
        let t = self.load_table()?;
        let p = t.params;
        Ok((t, p))
    }
}

pub fn rise_for(tau: f64) -> Result<RiseSpec<f64>> {
    if tau == 0.0 {
        Ok(RiseSpec::square())
    } else {
        Ok(RiseSpec::sine(tau)?)
    }
}

pub fn apply_rotation(cfg: &mut RunConfig, a: &RotationArgs) {
    if let Some(t) = a.tau {
        cfg.rotation.tau = t;
    }
}
