//! Run configuration: TOML file plus command-line overrides.
//!
//! Every section is optional. Units: rise times and durations in `t_x`,
//! detunings and noise strengths in multiples of Δ, simulator lengths in
//! nm, energies in meV, bias in mV.

use std::path::Path;

use dqd_qubit::calibration::AscentConfig;
use dqd_qubit::pulse::REFERENCE_TAUS;
use dqd_qubit::tdse::{Grid1D, PotentialSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub calibration: CalibrationConfig,
    pub rotation: RotationConfig,
    pub noise: NoiseConfig,
    pub tdse: TdseConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            calibration: CalibrationConfig::default(),
            rotation: RotationConfig::default(),
            noise: NoiseConfig::default(),
            tdse: TdseConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Explicit rise times; when empty the first `tau_ref` reference values
    /// are used.
    pub taus: Vec<f64>,
    pub tau_ref: usize,
    /// Number of angles `k·2π/angles`, `k = 1..=angles`.
    pub angles: usize,
    pub tolerance: f64,
    pub max_evals: usize,
    pub complement: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let a = AscentConfig::default();
        Self {
            taus: Vec::new(),
            tau_ref: REFERENCE_TAUS.len(),
            angles: 16,
            tolerance: a.tolerance,
            max_evals: a.max_evals,
            complement: a.complement,
        }
    }
}

impl CalibrationConfig {
    pub fn tau_grid(&self) -> Vec<f64> {
        if self.taus.is_empty() {
            REFERENCE_TAUS[..self.tau_ref.min(REFERENCE_TAUS.len())].to_vec()
        } else {
            self.taus.clone()
        }
    }

    pub fn angle_grid(&self) -> Vec<f64> {
        let n = self.angles as f64;
        (1..=self.angles)
            .map(|k| k as f64 * std::f64::consts::TAU / n)
            .collect()
    }

    pub fn ascent(&self) -> AscentConfig {
        AscentConfig {
            tolerance: self.tolerance,
            max_evals: self.max_evals,
            complement: self.complement,
            ..AscentConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotationConfig {
    /// Rise time used by `rotate`, `fidelity-map` and `noise-sweep`.
    pub tau: f64,
    /// Bloch samples for `fidelity-map`.
    pub map_points: usize,
    /// Trajectory sampling interval.
    pub sample_dt: f64,
}

impl Default for RotationConfig {
    fn default() -> Self {
        Self {
            tau: REFERENCE_TAUS[0],
            map_points: 500,
            sample_dt: 1.0 / 500.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub sigmas: Vec<f64>,
    pub samples: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2],
            samples: dqd_qubit::noise::DEFAULT_GAIN_SAMPLES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TdseConfig {
    pub grid: Grid1D,
    pub potential: PotentialSpec,
    /// Step as a fraction of `ħ/E_max`.
    pub dt_factor: f64,
    /// Snapshot interval in ps; 0 disables snapshots.
    pub snapshot_every: f64,
    /// Length of the norm-conservation run in `t_x`.
    pub norm_run: f64,
    /// Bias grid for the λ fit reaches `|ε| = lambda_range · Δ`.
    pub lambda_range: f64,
    pub lambda_points: usize,
    /// Rise time of the preparation pulse replayed in the simulator.
    pub prep_tau: f64,
}

impl Default for TdseConfig {
    fn default() -> Self {
        Self {
            grid: Grid1D::reference(),
            potential: PotentialSpec::reference(),
            dt_factor: 0.5,
            snapshot_every: 0.0,
            norm_run: 1.0,
            lambda_range: 2.0,
            lambda_points: 11,
            prep_tau: REFERENCE_TAUS[0],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Rejects values no command could use.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Usage(m.to_string()));
        let c = &self.calibration;
        if c.taus.iter().any(|t| !(*t > 0.0 && *t < 0.25)) {
            return bad("calibration.taus must lie in (0, 0.25) t_x");
        }
        if !(c.tolerance > 0.0) {
            return bad("calibration.tolerance must be positive");
        }
        if !(self.rotation.tau >= 0.0) || !(self.rotation.sample_dt > 0.0) {
            return bad("rotation.tau must be >= 0 and rotation.sample_dt > 0");
        }
        if self.noise.sigmas.iter().any(|s| !(*s >= 0.0)) {
            return bad("noise.sigmas must be nonnegative");
        }
        if self.noise.samples == 0 {
            return bad("noise.samples must be at least 1");
        }
        let t = &self.tdse;
        if !(t.dt_factor > 0.0) || !(t.norm_run >= 0.0) || !(t.snapshot_every >= 0.0) {
            return bad("tdse.dt_factor must be positive, norm_run and snapshot_every nonnegative");
        }
        if t.lambda_points < 3 || !(t.lambda_range > 0.0) {
            return bad("tdse.lambda_points must be >= 3 and lambda_range positive");
        }
        Grid1D::new(t.grid.x_min, t.grid.x_max, t.grid.n_points)
            .map_err(|e| CliError::Usage(format!("tdse.grid: {e}")))?;
        t.potential
            .validate()
            .map_err(|e| CliError::Usage(format!("tdse.potential: {e}")))?;
        Ok(())
    }

    /// SHA-256 of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
