//! `dqd`: calibration, rotation, noise and simulator runs for the
//! double-dot charge qubit. Artifacts go to `--out DIR` as CSV/JSON.

mod artifacts;
mod commands;
mod config;
mod error;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dqd", version, about)]
struct Cli {
    /// Output directory for all artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the noise generator (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Calibration table JSON. Default: <out>/calibration_table.json.
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate (ξ, ΔT) over rise times and angles; writes the table and fig2.csv.
    Calibrate(CalibrateArgs),
    /// Run one rotation; writes the Bloch trajectory and pulse profile.
    Rotate(RotateArgs),
    /// State-fidelity error of one rotation over a Fibonacci sphere of initial states.
    FidelityMap(MapArgs),
    /// Quasistatic-noise Monte Carlo: subdivision gain or square-vs-corrected comparison.
    NoiseSweep(NoiseArgs),
    /// Simulator checks: spectrum, stationarity, norm, λ linearity, pulse replay.
    TdseValidate(TdseArgs),
    /// Readout calibration and amplitude estimates from right-dot probabilities.
    Readout(ReadoutArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Use the first N reference rise times (min-angles π/8, π/6, π/4, π/3, π/2).
    #[arg(long)]
    pub tau_ref: Option<usize>,
    /// Explicit rise times in t_x, comma-separated; replaces --tau-ref.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    /// Number of target angles k·2π/M, k = 1..=M.
    #[arg(long)]
    pub angles: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RotationArgs {
    /// Rotation axis: x, y, z (optionally signed), x', z', or nx,ny,nz.
    #[arg(long, default_value = "x", allow_hyphen_values = true)]
    pub axis: String,
    /// Rotation angle in radians; accepts pi, 3pi/2, -pi/2, 0.5*pi.
    #[arg(long, default_value = "pi", allow_hyphen_values = true)]
    pub angle: String,
    /// Pulse rise time in t_x; 0 gives ideal square pulses.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    #[command(flatten)]
    pub rotation: RotationArgs,
    /// Initial state: 0, 1, +, -, +i, -i, ground, or theta,phi in radians.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub init: String,
    /// Also replay the pulse in the finite-difference simulator.
    #[arg(long)]
    pub tdse: bool,
    /// Play the rotation as equal pieces small enough for the rise time
    /// (lab axes only).
    #[arg(long)]
    pub subdivide: bool,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub rotation: RotationArgs,
    /// Number of initial states.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum NoiseMode {
    /// Whole rotation vs its equal-piece subdivision (ramped pulses).
    Gain,
    /// Square vs rise-time-corrected pulses for the same rotation.
    Compare,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long, value_enum, default_value = "gain")]
    pub mode: NoiseMode,
    /// Rotation axis (x, y, z, x', z', or nx,ny,nz).
    #[arg(long, default_value = "x", allow_hyphen_values = true)]
    pub axis: String,
    /// Rotation angle in radians.
    #[arg(long, default_value = "3pi/2", allow_hyphen_values = true)]
    pub angle: String,
    /// Pulse rise time in t_x.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Noise standard deviations in units of Δ, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sigmas: Option<Vec<f64>>,
    /// Monte Carlo samples per point.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TdseArgs {
    /// Time step as a fraction of the stability bound ħ/E_max.
    #[arg(long)]
    pub dt_factor: Option<f64>,
    /// Barrier height B in meV; 0 switches to the harmonic-ladder check.
    #[arg(long)]
    pub barrier: Option<f64>,
    /// Grid points (the domain is kept).
    #[arg(long)]
    pub points: Option<usize>,
    /// Length of the norm-conservation run in t_x.
    #[arg(long)]
    pub norm_run: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReadoutArgs {
    /// Extra logical states to estimate (same syntax as rotate --init).
    #[arg(long = "state", allow_hyphen_values = true)]
    pub states: Vec<String>,
    /// Barrier height B in meV.
    #[arg(long)]
    pub barrier: Option<f64>,
    /// Right-well stiffening: the harmonic term is A(1 + asymmetry) for x > 0.
    #[arg(long, allow_hyphen_values = true)]
    pub asymmetry: Option<f64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => config::RunConfig::load(p)?,
        None => config::RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let name = match &cli.command {
        Command::Calibrate(a) => {
            commands::calibrate::apply(&mut cfg, a)?;
            "calibrate"
        }
        Command::Rotate(a) => {
            commands::apply_rotation(&mut cfg, &a.rotation);
            "rotate"
        }
        Command::FidelityMap(a) => {
            commands::apply_rotation(&mut cfg, &a.rotation);
            if let Some(n) = a.points {
                cfg.rotation.map_points = n;
            }
            "fidelity-map"
        }
        Command::NoiseSweep(a) => {
            commands::noise_sweep::apply(&mut cfg, a)?;
            "noise-sweep"
        }
        Command::TdseValidate(a) => {
            commands::tdse_validate::apply(&mut cfg, a);
            "tdse-validate"
        }
        Command::Readout(a) => {
            commands::readout::apply(&mut cfg, a);
            "readout"
        }
    };
    cfg.validate()?;
    let ctx = Context::new(cfg, name, &cli.out, cli.table.clone())?;
    match &cli.command {
        Command::Calibrate(_) => commands::calibrate::run(&ctx),
        Command::Rotate(a) => commands::rotate::run(&ctx, a),
        Command::FidelityMap(a) => commands::fidelity_map::run(&ctx, a),
        Command::NoiseSweep(a) => commands::noise_sweep::run(&ctx, a),
        Command::TdseValidate(_) => commands::tdse_validate::run(&ctx),
        Command::Readout(a) => commands::readout::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(64)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
