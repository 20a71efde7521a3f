//! Quasistatic charge-noise Monte Carlo.
//!
//! Each sample adds one constant offset `δ ~ N(0, σ·delta)` to the whole
//! detuning waveform. Offsets come from standard normals drawn with ChaCha8
//! and the ziggurat transform of `rand_distr`, so compared variants that share
//! a seed see exactly the same offsets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationTable;
use crate::decomposition::DecompositionResult;
use crate::error::{domain, Result};
use crate::pulse::{rotation_pieces, subdivide, train_waveform, RiseSpec};
use crate::two_level::{
    default_dt, process_fidelity, propagate, realized_unitary, square_pulse_unitary,
    state_fidelity, BlochVector, DetuningWaveform, QubitParams, QubitState, Unitary2,
};

/// Noise strength, seed and sample count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the offset as a multiple of `delta`.
    pub sigma_noise: f64,
    pub seed: u64,
    pub n_samples: usize,
}

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_GAIN_SAMPLES: usize = 400;

impl NoiseModel {
    pub fn new(sigma_noise: f64, seed: u64, n_samples: usize) -> Result<Self> {
        let m = Self {
            sigma_noise,
            seed,
            n_samples,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_noise >= 0.0) || !self.sigma_noise.is_finite() {
            return Err(domain("noise strength must be finite and nonnegative"));
        }
        if self.n_samples == 0 {
            return Err(domain("need at least one noise sample"));
        }
        Ok(())
    }

    pub fn with_sigma(&self, sigma_noise: f64) -> Self {
        Self {
            sigma_noise,
            ..*self
        }
    }

    /// Standard-normal variates for this seed; independent of `sigma_noise`.
    pub fn standard_draws(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_samples)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect()
    }

    /// Detuning offsets in the energy unit of `params`.
    pub fn offsets(&self, params: &QubitParams<f64>) -> Vec<f64> {
        let scale = self.sigma_noise * params.delta;
        self.standard_draws()
            .into_iter()
            .map(|z| z * scale)
            .collect()
    }
}

/// What a noisy run is scored against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseTarget {
    /// Process fidelity against a gate.
    Unitary(Unitary2<f64>),
    /// State fidelity of `initial` evolved, against `target`.
    State {
        initial: QubitState<f64>,
        target: QubitState<f64>,
    },
}

/// Monte Carlo summary plus the raw samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub mean_fidelity: f64,
    pub fidelity_std_error: f64,
    pub fidelities: Vec<f64>,
    /// Offsets applied, in sample order.
    pub draws: Vec<f64>,
    pub model: NoiseModel,
}

impl NoiseReport {
    pub fn mean_infidelity(&self) -> f64 {
        1.0 - self.mean_fidelity
    }

    fn from_samples(fidelities: Vec<f64>, draws: Vec<f64>, model: NoiseModel) -> Self {
        let (mean, se) = mean_and_std_error(&fidelities);
        Self {
            mean_fidelity: mean.clamp(0.0, 1.0),
            fidelity_std_error: se,
            fidelities,
            draws,
            model,
        }
    }
}

/// Sample mean and `std / √n` (sample standard deviation, `n - 1`).
///
/// The mean is accumulated relative to the first sample, so identical
/// samples give back exactly that value.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let Some(&x0) = xs.first() else {
        return (f64::NAN, 0.0);
    };
    let mean = x0 + xs.iter().map(|x| x - x0).sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn score(
    w: &DetuningWaveform<f64>,
    target: &NoiseTarget,
    params: &QubitParams<f64>,
) -> Result<f64> {
    let dt = default_dt(params);
    match target {
        NoiseTarget::Unitary(v) => process_fidelity(&realized_unitary(w, params, dt)?, v),
        NoiseTarget::State { initial, target } => {
            state_fidelity(&propagate(initial, w, params, dt)?, target)
        }
    }
}

/// Evaluates `f(i, draw)` for every draw, splitting the index range across
/// threads. Output order follows the input.
fn par_map<F>(draws: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(draws.len().max(1));
    let chunk = draws.len().div_ceil(threads).max(1);
    let parts: Vec<Result<Vec<f64>>> = std::thread::scope(|s| {
        let handles: Vec<_> = draws
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(|&d| f(d)).collect::<Result<Vec<f64>>>())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("noise worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(draws.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Averages the fidelity of `factory(δ)` over the model's offsets.
///
/// `factory` receives the offset and returns the waveform to simulate;
/// [`offset_factory`] covers the usual case of a fixed pulse.
pub fn run_noisy<F>(
    factory: F,
    target: &NoiseTarget,
    model: &NoiseModel,
    params: &QubitParams<f64>,
) -> Result<NoiseReport>
where
    F: Fn(f64) -> Result<DetuningWaveform<f64>> + Sync,
{
    model.validate()?;
    let draws = model.offsets(params);
    let fidelities = par_map(&draws, |d| score(&factory(d)?, target, params))?;
    Ok(NoiseReport::from_samples(fidelities, draws, *model))
}

/// Factory that shifts `waveform` by the offset.
pub fn offset_factory(
    waveform: &DetuningWaveform<f64>,
) -> impl Fn(f64) -> Result<DetuningWaveform<f64>> + Sync + '_ {
    move |d| Ok(waveform.with_offset(d))
}

/// Square and rise-time-corrected versions of one pulse sequence under the
/// same noise draws.
pub fn compare_square_corrected(
    result: &DecompositionResult<f64>,
    rise: &RiseSpec<f64>,
    table: &CalibrationTable,
    model: &NoiseModel,
    params: &QubitParams<f64>,
) -> Result<(NoiseReport, NoiseReport)> {
    let target = NoiseTarget::Unitary(result.unitary());
    let square = train_waveform(result, &RiseSpec::square(), table, params)?;
    let corrected = train_waveform(result, rise, table, params)?;
    Ok((
        run_noisy(offset_factory(&square), &target, model, params)?,
        run_noisy(offset_factory(&corrected), &target, model, params)?,
    ))
}

/// One point of a subdivision gain curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub sigma: f64,
    /// Mean infidelity of the undivided sequence.
    pub err_unsub: f64,
    /// Mean infidelity of the subdivided sequence.
    pub err_sub: f64,
    /// `err_unsub / err_sub`.
    pub gain: f64,
    /// Paired delta-method standard error of `gain`.
    pub stderr: f64,
    pub pieces: usize,
}

fn ratio_std_error(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    if a.len() < 2 || mb == 0.0 {
        return 0.0;
    }
    let g = ma / mb;
    let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - g * y).collect();
    let (_, se) = mean_and_std_error(&resid);
    se / mb
}

/// Infidelity ratio of the three-pulse rotation over its equal-piece
/// subdivision, for each noise strength in `sigma_grid`.
///
/// Both sequences use ramped pulses resolved from `table` at rise time `tau`
/// and share the draws of `model` (its `sigma_noise` is replaced per point).
/// `σ = 0` is reported as unit gain with zero standard error.
pub fn subdivision_gain(
    axis: BlochVector<f64>,
    angle: f64,
    tau: f64,
    sigma_grid: &[f64],
    model: &NoiseModel,
    table: &CalibrationTable,
    params: &QubitParams<f64>,
) -> Result<Vec<GainPoint>> {
    let sub = subdivide(axis, angle, tau, params)?;
    if sub.complement {
        return Err(domain(format!(
            "rotation by {angle} cannot be subdivided above the minimum angle at tau {tau}"
        )));
    }
    let rise = RiseSpec::sine(tau)?;
    let target = NoiseTarget::Unitary(square_pulse_unitary(axis, angle)?);
    let whole = train_waveform(&rotation_pieces(axis, angle, 1)?, &rise, table, params)?;
    let split = train_waveform(&sub.result(), &rise, table, params)?;
    let mut out = Vec::with_capacity(sigma_grid.len());
    for &sigma in sigma_grid {
        let m = model.with_sigma(sigma);
        let a = run_noisy(offset_factory(&whole), &target, &m, params)?;
        let b = run_noisy(offset_factory(&split), &target, &m, params)?;
        let ea: Vec<f64> = a.fidelities.iter().map(|f| 1.0 - f).collect();
        let eb: Vec<f64> = b.fidelities.iter().map(|f| 1.0 - f).collect();
        let (err_unsub, err_sub) = (a.mean_infidelity(), b.mean_infidelity());
        let (gain, stderr) = if sigma == 0.0 {
            (1.0, 0.0)
        } else {
            (err_unsub / err_sub, ratio_std_error(&ea, &eb))
        };
        out.push(GainPoint {
            sigma,
            err_unsub,
            err_sub,
            gain,
            stderr,
            pieces: sub.pieces,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reduced() -> QubitParams<f64> {
        QubitParams::reduced()
    }

    #[test]
    fn model_validation() {
        assert!(NoiseModel::new(-0.1, 1, 10).is_err());
        assert!(NoiseModel::new(0.1, 1, 0).is_err());
        assert!(NoiseModel::new(0.0, 1, 1).is_ok());
    }

    #[test]
    fn zero_sigma_is_noiseless() {
        let p = reduced();
        let w = DetuningWaveform::constant(1.0, 2.0);
        let u = realized_unitary(&w, &p, default_dt(&p)).unwrap();
        let m = NoiseModel::new(0.0, 3, 20).unwrap();
        let r = run_noisy(offset_factory(&w), &NoiseTarget::Unitary(u), &m, &p).unwrap();
        assert!(r.draws.iter().all(|d| *d == 0.0));
        let f0 = process_fidelity(&u, &u).unwrap();
        assert_eq!(r.mean_fidelity, f0);
        assert_eq!(r.fidelity_std_error, 0.0);
    }

    #[test]
    fn seeded_draws_repeat() {
        let m = NoiseModel::new(0.1, 42, 64).unwrap();
        assert_eq!(m.standard_draws(), m.standard_draws());
        assert_ne!(
            m.standard_draws(),
            NoiseModel::new(0.1, 43, 64).unwrap().standard_draws()
        );
        let p = reduced();
        let scaled = m.with_sigma(0.2).offsets(&p);
        for (a, b) in m.offsets(&p).iter().zip(&scaled) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn state_target() {
        let p = reduced();
        let w = DetuningWaveform::constant(0.0, 0.3);
        let init = QubitState::zero();
        let out = propagate(&init, &w, &p, default_dt(&p)).unwrap();
        let m = NoiseModel::new(0.05, 1, 16).unwrap();
        let t = NoiseTarget::State {
            initial: init,
            target: out,
        };
        let r = run_noisy(offset_factory(&w), &t, &m, &p).unwrap();
        assert!(r.mean_fidelity < 1.0 && r.mean_fidelity > 0.99);
        assert_eq!(r.fidelities.len(), 16);
    }

    #[test]
    fn std_error_formula() {
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
