//! One-dimensional double-dot simulator.
//!
//! Units: energy meV, length nm, time ps, bias mV (so the Stark term
//! `V_bias x / 2w` is directly in meV). The logical basis is built from the
//! two lowest zero-bias eigenstates as
//! `|0⟩ = (ψB + ψAB)/√2` (left dot) and `|1⟩ = (ψAB − ψB)/√2` (right dot, up
//! to sign), with `ψAB` positive on the left. With this sign the projected
//! dynamics follow `H = −(ε/2)σz + (Δ/2)σx`, the same form as the two-level
//! model, and `ψB` itself sits at the `−x` pole.

mod eigen;
mod leapfrog;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::two_level::{DetuningWaveform, QubitState};

pub use eigen::{lowest_eigenpairs, Tridiagonal};
pub use leapfrog::{leapfrog_step, max_stable_dt, Staggered};

use leapfrog::{check_stability, stagger, step, synchronize, Stencil};

/// ħ in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;
/// ħ²/(2 m_e) in meV·nm².
pub const HBAR2_OVER_2ME: f64 = 38.099_821_2;

/// Uniform grid including both hard-wall end points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(domain("grid needs at least 3 points"));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(domain("grid needs finite x_min < x_max"));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// 460 nm centred on the barrier, 1024 points.
    pub fn reference() -> Self {
        Self {
            x_min: -230.0,
            x_max: 230.0,
            n_points: 1024,
        }
    }

    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::new(self.x_min, self.x_max, n_points)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }
}

/// Quadratic confinement, Gaussian barrier and linear bias.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    /// Harmonic coefficient, meV/nm².
    pub a_coef: f64,
    /// Barrier height, meV.
    pub b_height: f64,
    /// Barrier width parameter in `exp(−x²/2σ)`, nm².
    pub sigma_width: f64,
    /// Half the device width `w`, nm.
    pub half_width: f64,
    /// Bias across the device, mV.
    pub v_bias: f64,
    /// Effective mass in units of the free electron mass.
    pub effective_mass: f64,
    /// Relative stiffening of the right well (`A(1 + asym)` for `x > 0`).
    #[serde(default)]
    pub asymmetry: f64,
}

impl PotentialSpec {
    /// GaAs device with a 230 nm half width and 4.08 meV barrier. The
    /// harmonic coefficient is 1.276e-4 meV/nm² and the barrier width is
    /// chosen so that the tunnel gap is 11.7 µeV on the reference grid.
    pub fn reference() -> Self {
        Self {
            a_coef: 1.276e-4,
            b_height: 4.08,
            sigma_width: REFERENCE_SIGMA_WIDTH,
            half_width: 230.0,
            v_bias: 0.0,
            effective_mass: 0.067,
            asymmetry: 0.0,
        }
    }

    pub fn with_bias(&self, v_bias: f64) -> Self {
        Self { v_bias, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_height >= 0.0) {
            return Err(domain("barrier height must be nonnegative"));
        }
        if !(self.sigma_width > 0.0) {
            return Err(domain("barrier width must be positive"));
        }
        if !(self.a_coef > 0.0 && self.half_width > 0.0 && self.effective_mass > 0.0) {
            return Err(domain("confinement, half width and mass must be positive"));
        }
        if !(self.asymmetry > -1.0) {
            return Err(domain("asymmetry must exceed -1"));
        }
        Ok(())
    }

    /// Potential energy in meV at `x` nm.
    pub fn potential(&self, x: f64) -> f64 {
        let a = if x > 0.0 {
            self.a_coef * (1.0 + self.asymmetry)
        } else {
            self.a_coef
        };
        a * x * x
            + self.b_height * (-x * x / (2.0 * self.sigma_width)).exp()
            + self.v_bias * x / (2.0 * self.half_width)
    }

    /// `ħ²/(2 m* dx²)` in meV.
    pub fn hopping(&self, dx: f64) -> f64 {
        HBAR2_OVER_2ME / (self.effective_mass * dx * dx)
    }

    /// Whether the symmetric unbiased potential has two minima
    /// (`B > 2Aσ`).
    pub fn is_double_well(&self) -> bool {
        self.b_height > 2.0 * self.a_coef * self.sigma_width
    }

    /// Positions of the two minima of the symmetric unbiased potential.
    pub fn well_minima(&self) -> Option<(f64, f64)> {
        if !self.is_double_well() {
            return None;
        }
        let x = (2.0
            * self.sigma_width
            * (self.b_height / (2.0 * self.a_coef * self.sigma_width)).ln())
        .sqrt();
        Some((-x, x))
    }

    fn hamiltonian(&self, grid: &Grid1D) -> Tridiagonal {
        let t0 = self.hopping(grid.dx());
        let n = grid.n_points - 2;
        Tridiagonal {
            diag: (1..=n)
                .map(|i| 2.0 * t0 + self.potential(grid.x(i)))
                .collect(),
            off: vec![-t0; n.saturating_sub(1)],
        }
    }
}

/// Barrier width giving Δ = 11.7 µeV for [`PotentialSpec::reference`] on
/// [`Grid1D::reference`].
pub const REFERENCE_SIGMA_WIDTH: f64 = 499.358;

/// An energy eigenstate on the full grid, `Σ ψ² dx = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenstate {
    pub energy: f64,
    pub psi: Vec<f64>,
}

/// Absolute eigen-residual bound in meV for unit-norm vectors.
pub const EIGEN_TOL: f64 = 1e-8;

/// The `k` lowest eigenstates of the discretized Hamiltonian.
pub fn stationary_states(spec: &PotentialSpec, grid: &Grid1D, k: usize) -> Result<Vec<Eigenstate>> {
    spec.validate()?;
    if k < 2 {
        return Err(domain("ask for at least two states"));
    }
    let h = spec.hamiltonian(grid);
    let pairs = lowest_eigenpairs(&h, k, EIGEN_TOL)?;
    let scale = 1.0 / grid.dx().sqrt();
    Ok(pairs
        .into_iter()
        .map(|(energy, v)| {
            let mut psi = Vec::with_capacity(grid.n_points);
            psi.push(0.0);
            psi.extend(v.iter().map(|x| x * scale));
            psi.push(0.0);
            Eigenstate { energy, psi }
        })
        .collect())
}

/// Bonding and antibonding states with fixed signs: `ψB` has positive sum,
/// `ψAB` is positive on the left.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPair {
    pub e_bonding: f64,
    pub e_antibonding: f64,
    pub psi_bonding: Vec<f64>,
    pub psi_antibonding: Vec<f64>,
    pub dx: f64,
}

impl SpectralPair {
    /// `E_AB − E_B` in meV.
    pub fn gap(&self) -> f64 {
        self.e_antibonding - self.e_bonding
    }

    pub fn logical_zero(&self) -> Vec<f64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        self.psi_bonding
            .iter()
            .zip(&self.psi_antibonding)
            .map(|(b, a)| r * (b + a))
            .collect()
    }

    pub fn logical_one(&self) -> Vec<f64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        self.psi_bonding
            .iter()
            .zip(&self.psi_antibonding)
            .map(|(b, a)| r * (a - b))
            .collect()
    }

    /// Wave function of a logical state.
    pub fn embed(&self, q: &QubitState<f64>) -> Wavefunction1D {
        let z = self.logical_zero();
        let o = self.logical_one();
        let u = z
            .iter()
            .zip(&o)
            .map(|(z, o)| q.a0.re * z + q.a1.re * o)
            .collect();
        let v = z
            .iter()
            .zip(&o)
            .map(|(z, o)| q.a0.im * z + q.a1.im * o)
            .collect();
        Wavefunction1D {
            u,
            v,
            time: 0.0,
            dx: self.dx,
        }
    }
}

pub fn spectral_pair(spec: &PotentialSpec, grid: &Grid1D) -> Result<SpectralPair> {
    let mut states = stationary_states(spec, grid, 2)?;
    let ab = states.pop().expect("two states");
    let b = states.pop().expect("two states");
    let mid = grid.n_points / 2;
    let mut psi_b = b.psi;
    if psi_b.iter().sum::<f64>() < 0.0 {
        psi_b.iter_mut().for_each(|x| *x = -*x);
    }
    let mut psi_ab = ab.psi;
    if psi_ab[..mid].iter().sum::<f64>() < 0.0 {
        psi_ab.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(SpectralPair {
        e_bonding: b.energy,
        e_antibonding: ab.energy,
        psi_bonding: psi_b,
        psi_antibonding: psi_ab,
        dx: grid.dx(),
    })
}

/// Complex wave function `u + i v` with both parts at `time` (ps).
#[derive(Clone, Debug, PartialEq)]
pub struct Wavefunction1D {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
    pub dx: f64,
}

impl Wavefunction1D {
    pub fn from_real(psi: &[f64], dx: f64) -> Self {
        Self {
            u: psi.to_vec(),
            v: vec![0.0; psi.len()],
            time: 0.0,
            dx,
        }
    }

    pub fn norm(&self) -> f64 {
        self.density().iter().sum::<f64>() * self.dx
    }

    pub fn density(&self) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| u * u + v * v)
            .collect()
    }

    /// `⟨φ|ψ⟩` for a real `φ`.
    pub fn overlap_real(&self, phi: &[f64]) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for ((p, u), v) in phi.iter().zip(&self.u).zip(&self.v) {
            re += p * u;
            im += p * v;
        }
        Complex64::new(re * self.dx, im * self.dx)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..self.u.len() {
            re += self.u[i] * other.u[i] + self.v[i] * other.v[i];
            im += self.u[i] * other.v[i] - self.v[i] * other.u[i];
        }
        (re * re + im * im) * self.dx * self.dx
    }

    /// Complex conjugate; evolving the conjugate forward runs time backward.
    pub fn conjugate(&self) -> Self {
        Self {
            v: self.v.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }
}

/// Final state of a run plus bookkeeping.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: Wavefunction1D,
    /// Synchronized states at the requested cadence, including both ends.
    pub snapshots: Vec<Wavefunction1D>,
    /// Largest deviation of the conserved norm from its initial value.
    pub max_norm_drift: f64,
    pub steps: usize,
    pub dt: f64,
}

/// Bias in mV as a function of time in ps.
pub type BiasFn<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

/// Evolves `wf` for `duration` ps with steps of at most `dt`.
///
/// The step is checked against `ħ/E_max` over every bias value the run will
/// visit before any stepping.
pub fn evolve(
    wf: &Wavefunction1D,
    spec: &PotentialSpec,
    grid: &Grid1D,
    bias: BiasFn,
    duration: f64,
    dt: f64,
) -> Result<Wavefunction1D> {
    Ok(evolve_recorded(wf, spec, grid, bias, duration, dt, None)?.state)
}

/// [`evolve`] with norm tracking and optional snapshots every
/// `snapshot_every` ps.
pub fn evolve_recorded(
    wf: &Wavefunction1D,
    spec: &PotentialSpec,
    grid: &Grid1D,
    bias: BiasFn,
    duration: f64,
    dt: f64,
    snapshot_every: Option<f64>,
) -> Result<Evolution> {
    spec.validate()?;
    if wf.u.len() != grid.n_points || wf.v.len() != grid.n_points {
        return Err(domain("wave function does not match the grid"));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(domain("duration must be finite and nonnegative"));
    }
    if !(dt > 0.0) {
        return Err(domain("time step must be positive"));
    }
    let steps = (duration / dt).ceil() as usize;
    let h = if steps == 0 {
        dt
    } else {
        duration / steps as f64
    };
    let t0 = wf.time;
    let unbiased = spec.with_bias(0.0);
    let stencil = Stencil::new(&unbiased, grid);
    let offset = spec.v_bias;
    let bias_at = |t: f64| offset + bias(t - t0);
    let mut worst = stencil.e_max(bias_at(t0));
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        worst = worst
            .max(stencil.e_max(bias_at(t + 0.5 * h)))
            .max(stencil.e_max(bias_at(t + h)));
    }
    check_stability(h, HBAR_MEV_PS / worst)?;

    let mut s = stagger(wf, &stencil, bias_at(t0), h);
    let norm0 = s.conserved_norm(&stencil, bias_at(t0), wf.dx);
    let mut drift: f64 = 0.0;
    let track_every = (steps / 1000).max(1);
    let mut snapshots = Vec::new();
    let sync = |s: &Staggered| {
        let (u, v) = synchronize(s, &stencil, bias_at(s.time));
        Wavefunction1D {
            u,
            v,
            time: s.time,
            dx: wf.dx,
        }
    };
    let mut next_snap = t0;
    if snapshot_every.is_some() {
        snapshots.push(wf.clone());
        next_snap += snapshot_every.unwrap_or(f64::INFINITY);
    }
    for k in 0..steps {
        step(&mut s, &stencil, &bias_at);
        if (k + 1) % track_every == 0 || k + 1 == steps {
            let n = s.conserved_norm(&stencil, bias_at(s.time), wf.dx);
            drift = drift.max((n - norm0).abs());
        }
        if let Some(every) = snapshot_every {
            if s.time >= next_snap - 1e-9 * h && k + 1 < steps {
                snapshots.push(sync(&s));
                next_snap += every;
            }
        }
    }
    s.time = t0 + duration;
    let state = sync(&s);
    if snapshot_every.is_some() && duration > 0.0 {
        snapshots.push(state.clone());
    }
    Ok(Evolution {
        state,
        snapshots,
        max_norm_drift: drift,
        steps,
        dt: h,
    })
}

/// Logical amplitudes of `wf` (renormalized) and the weight outside the
/// logical subspace.
pub fn project_logical(wf: &Wavefunction1D, pair: &SpectralPair) -> (QubitState<f64>, f64) {
    let c0 = wf.overlap_real(&pair.logical_zero());
    let c1 = wf.overlap_real(&pair.logical_one());
    let inside = c0.norm_sqr() + c1.norm_sqr();
    let leakage = (wf.norm() - inside).max(0.0);
    let q = if inside > 0.0 {
        let s = inside.sqrt();
        QubitState {
            a0: c0 / s,
            a1: c1 / s,
        }
    } else {
        QubitState::zero()
    };
    (q, leakage)
}

/// Result of fitting `ε = λ V_bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaFit {
    pub lambda: f64,
    /// `max |ε − λV| / max |ε|` over the bias grid.
    pub linearity_residual: f64,
    /// Zero-bias gap, meV.
    pub delta: f64,
    /// `(V_bias, ε)` pairs in (mV, meV).
    pub points: Vec<(f64, f64)>,
}

/// Extracts `ε(V) = ±√(gap(V)² − Δ²)` on `bias_grid` and fits `ε = λV`
/// through the origin.
pub fn calibrate_lambda(
    spec: &PotentialSpec,
    grid: &Grid1D,
    bias_grid: &[f64],
) -> Result<LambdaFit> {
    if !spec.is_double_well() {
        return Err(domain("lambda calibration needs a double-well potential"));
    }
    if bias_grid.iter().all(|v| *v == 0.0) {
        return Err(domain("bias grid needs nonzero points"));
    }
    let delta = spectral_pair(&spec.with_bias(0.0), grid)?.gap();
    let mut points = Vec::with_capacity(bias_grid.len());
    for &v in bias_grid {
        let eps = if v == 0.0 {
            0.0
        } else {
            let g = spectral_pair(&spec.with_bias(v), grid)?.gap();
            v.signum() * (g * g - delta * delta).max(0.0).sqrt()
        };
        points.push((v, eps));
    }
    let num: f64 = points.iter().map(|(v, e)| v * e).sum();
    let den: f64 = points.iter().map(|(v, _)| v * v).sum();
    let lambda = num / den;
    let max_eps = points.iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
    let worst = points
        .iter()
        .map(|(v, e)| (e - lambda * v).abs())
        .fold(0.0, f64::max);
    if !(max_eps > 0.0) || !lambda.is_finite() {
        return Err(Error::NoConvergence {
            what: "lambda fit".into(),
            residual: worst,
        });
    }
    Ok(LambdaFit {
        lambda,
        linearity_residual: worst / max_eps,
        delta,
        points,
    })
}

/// Symmetric bias grid reaching `|ε| = eps_max_over_delta · Δ`, using the
/// dipole estimate `λ ≈ (⟨x⟩_R − ⟨x⟩_L)/2w` to size it.
pub fn operating_bias_grid(
    spec: &PotentialSpec,
    grid: &Grid1D,
    n_points: usize,
    eps_max_over_delta: f64,
) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(domain("bias grid needs at least two points"));
    }
    let pair = spectral_pair(&spec.with_bias(0.0), grid)?;
    let xs = grid.xs();
    let mean_x = |psi: &[f64]| psi.iter().zip(&xs).map(|(p, x)| p * p * x).sum::<f64>() * grid.dx();
    let sep = mean_x(&pair.logical_one()) - mean_x(&pair.logical_zero());
    let lambda_est = sep / (2.0 * spec.half_width);
    let v_max = eps_max_over_delta * pair.gap() / lambda_est;
    Ok((0..n_points)
        .map(|i| -v_max + 2.0 * v_max * i as f64 / (n_points - 1) as f64)
        .collect())
}

/// Energy and time scales for replaying reduced-unit pulses in the
/// simulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceScale {
    /// Gap Δ in meV.
    pub delta: f64,
    pub lambda: f64,
}

impl DeviceScale {
    /// Picoseconds per reduced time unit `ħ/Δ`.
    pub fn time_unit(&self) -> f64 {
        HBAR_MEV_PS / self.delta
    }

    /// Bias in mV for a reduced detuning (multiple of Δ).
    pub fn bias_for(&self, eps_reduced: f64) -> f64 {
        eps_reduced * self.delta / self.lambda
    }

    /// Bias function in ps for a reduced-unit waveform, and its duration.
    pub fn drive<'a>(
        &self,
        waveform: &'a DetuningWaveform<f64>,
    ) -> (impl Fn(f64) -> f64 + Sync + 'a, f64) {
        let s = *self;
        let tu = s.time_unit();
        (
            move |t_ps: f64| s.bias_for(waveform.value_at(t_ps / tu)),
            waveform.duration() * tu,
        )
    }
}

/// `(x, re, im, density, potential)` rows of a snapshot.
pub fn snapshot_rows(wf: &Wavefunction1D, spec: &PotentialSpec, grid: &Grid1D) -> Vec<[f64; 5]> {
    (0..grid.n_points)
        .map(|i| {
            let x = grid.x(i);
            let (u, v) = (wf.u[i], wf.v[i]);
            [x, u, v, u * u + v * v, spec.potential(x)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> PotentialSpec {
        PotentialSpec {
            a_coef: 0.01,
            b_height: 0.0,
            ..PotentialSpec::reference()
        }
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Grid1D::new(1.0, 0.0, 10).is_err());
        let g = Grid1D::reference();
        assert!((g.dx() * 1023.0 - 460.0).abs() < 1e-12);
    }

    #[test]
    fn potential_symmetry_and_top() {
        let s = PotentialSpec::reference();
        assert_eq!(s.potential(0.0), s.b_height);
        for x in [1.0, 13.7, 80.0, 229.0] {
            assert!(
                (s.potential(x) - s.potential(-x)).abs() <= 1e-15 * s.potential(x).abs().max(1.0)
            );
        }
        assert!(s.is_double_well());
        let (l, r) = s.well_minima().unwrap();
        assert!((l + r).abs() < 1e-12 && r > 0.0);
    }

    #[test]
    fn harmonic_ladder() {
        let s = harmonic();
        let g = Grid1D::new(-230.0, 230.0, 1024).unwrap();
        let st = stationary_states(&s, &g, 4).unwrap();
        // ħω = √(2A · ħ²/m*)
        let hw = (2.0 * s.a_coef * 2.0 * HBAR2_OVER_2ME / s.effective_mass).sqrt();
        assert!((st[0].energy - hw / 2.0).abs() < 1e-3 * hw / 2.0);
        for w in st.windows(2) {
            let gap = w[1].energy - w[0].energy;
            assert!((gap - hw).abs() < 1e-3 * hw, "{gap} vs {hw}");
        }
    }

    #[test]
    fn pair_signs_and_logical_states() {
        let g = Grid1D::reference().with_points(512).unwrap();
        let p = spectral_pair(&PotentialSpec::reference(), &g).unwrap();
        assert!(p.e_bonding < p.e_antibonding);
        let n = g.n_points;
        for i in 0..n {
            assert!((p.psi_bonding[i] - p.psi_bonding[n - 1 - i]).abs() < 1e-8);
            assert!((p.psi_antibonding[i] + p.psi_antibonding[n - 1 - i]).abs() < 1e-8);
        }
        let wf = Wavefunction1D::from_real(&p.psi_bonding, p.dx);
        let (q, leak) = project_logical(&wf, &p);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q.a0.re - r).abs() < 1e-10 && (q.a1.re + r).abs() < 1e-10);
        assert!(leak < 1e-10);
        let zero = Wavefunction1D::from_real(&p.logical_zero(), p.dx);
        let left: f64 = zero.density()[..n / 2].iter().sum::<f64>() * p.dx;
        assert!(left > 0.99);
    }

    #[test]
    fn third_state_leaks() {
        let g = Grid1D::reference().with_points(512).unwrap();
        let s = PotentialSpec::reference();
        let st = stationary_states(&s, &g, 3).unwrap();
        let p = spectral_pair(&s, &g).unwrap();
        let (_, leak) = project_logical(&Wavefunction1D::from_real(&st[2].psi, g.dx()), &p);
        assert!((leak - 1.0).abs() < 1e-8);
    }

    #[test]
    fn unstable_step_is_rejected() {
        let g = Grid1D::reference().with_points(256).unwrap();
        let s = PotentialSpec::reference();
        let p = spectral_pair(&s, &g).unwrap();
        let wf = Wavefunction1D::from_real(&p.psi_bonding, p.dx);
        let limit = max_stable_dt(&s, &g, 0.0);
        let r = evolve(&wf, &s, &g, &|_| 0.0, 10.1 * limit, 1.01 * limit);
        assert!(matches!(r, Err(Error::Unstable { .. })));
        assert!(evolve(&wf, &s, &g, &|_| 0.0, 10.0 * limit, limit).is_ok());
    }

    #[test]
    fn stencil_arithmetic() {
        let s = PotentialSpec {
            a_coef: 1e-30,
            b_height: 0.0,
            ..PotentialSpec::reference()
        };
        let g = Grid1D::new(-2.0, 2.0, 5).unwrap();
        let mut st = Staggered {
            u: vec![0.0; 5],
            v: vec![0.0, 0.0, 1.0, 0.0, 0.0],
            time: 0.0,
            dt: 1e-6,
        };
        leapfrog_step(&mut st, &s, &g).unwrap();
        let t0 = s.hopping(1.0);
        let a = 1e-6 / HBAR_MEV_PS;
        let exp_u = [0.0, -a * t0, 2.0 * a * t0, -a * t0, 0.0];
        for (got, want) in st.u.iter().zip(exp_u) {
            assert!((got - want).abs() < 1e-12 * t0 * a + 1e-300);
        }
        assert_eq!(st.u[0], 0.0);
        assert_eq!(st.v[4], 0.0);
    }
}
