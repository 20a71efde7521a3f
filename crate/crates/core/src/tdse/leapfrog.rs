//! Staggered real/imaginary leapfrog (Visscher) for the 1-D TDSE.
//!
//! With `ψ = u + i v`, one step of length `dt` is
//! `u(t+dt) = u(t) + (dt/ħ) H(t+dt/2) v(t+dt/2)` followed by
//! `v(t+3dt/2) = v(t+dt/2) − (dt/ħ) H(t+dt) u(t+dt)`.
//! The quantity `Σ u(t)² + v(t+dt/2)·v(t−dt/2)` is conserved exactly.

use super::{Grid1D, PotentialSpec, Wavefunction1D, HBAR_MEV_PS};
use crate::error::{domain, Error, Result};

/// Discretized Hamiltonian with a bias term that can change every step.
#[derive(Clone, Debug)]
pub(crate) struct Stencil {
    /// `2 t0 + V_dqd(x_i)` on interior points.
    base: Vec<f64>,
    /// `x_i / (2 w)`, multiplied by the bias in mV.
    slope: Vec<f64>,
    /// Hopping `t0 = ħ²/(2 m dx²)`.
    hop: f64,
}

impl Stencil {
    pub(crate) fn new(spec: &PotentialSpec, grid: &Grid1D) -> Self {
        let hop = spec.hopping(grid.dx());
        let interior = 1..grid.n_points - 1;
        let unbiased = PotentialSpec {
            v_bias: 0.0,
            ..*spec
        };
        Self {
            base: interior
                .clone()
                .map(|i| 2.0 * hop + unbiased.potential(grid.x(i)))
                .collect(),
            slope: interior
                .map(|i| grid.x(i) / (2.0 * spec.half_width))
                .collect(),
            hop,
        }
    }

    /// Gershgorin bound on `|E|` at the given bias.
    pub(crate) fn e_max(&self, bias: f64) -> f64 {
        self.base
            .iter()
            .zip(&self.slope)
            .map(|(b, s)| (b + bias * s).abs() + 2.0 * self.hop)
            .fold(0.0, f64::max)
    }

    /// `out += scale · H(bias) x` on the full grid (end points untouched).
    #[inline]
    fn add_applied(&self, bias: f64, scale: f64, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let hop = self.hop;
        for i in 1..n - 1 {
            let d = self.base[i - 1] + bias * self.slope[i - 1];
            out[i] += scale * (d * x[i] - hop * (x[i - 1] + x[i + 1]));
        }
    }

    fn applied(&self, bias: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.add_applied(bias, 1.0, x, &mut out);
        out
    }
}

/// Largest stable-by-specification step, `ħ / E_max`, over the biases the
/// run will visit.
pub fn max_stable_dt(spec: &PotentialSpec, grid: &Grid1D, max_abs_bias: f64) -> f64 {
    let s = Stencil::new(spec, grid);
    let e = s.e_max(max_abs_bias).max(s.e_max(-max_abs_bias));
    HBAR_MEV_PS / e
}

pub(crate) fn check_stability(dt: f64, limit: f64) -> Result<()> {
    if !(dt.abs() > 0.0) || !dt.is_finite() {
        return Err(domain("time step must be finite and nonzero"));
    }
    if dt.abs() > limit {
        return Err(Error::Unstable {
            dt: dt.abs(),
            limit,
        });
    }
    Ok(())
}

/// Leapfrog state: `u` at `time`, `v` at `time + dt/2`.
#[derive(Clone, Debug)]
pub struct Staggered {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
    pub dt: f64,
}

impl Staggered {
    /// Norm conserved by the scheme; needs the bias at `time`.
    pub(crate) fn conserved_norm(&self, stencil: &Stencil, bias: f64, dx: f64) -> f64 {
        let hu = stencil.applied(bias, &self.u);
        let a = self.dt / HBAR_MEV_PS;
        let s: f64 = self
            .u
            .iter()
            .zip(&self.v)
            .zip(&hu)
            .map(|((u, v), h)| u * u + v * (v + a * h))
            .sum();
        s * dx
    }
}

/// Second-order Taylor shift of `v` by `h` using `ψ' = −iHψ/ħ`:
/// `v(t+h) ≈ v − (h/ħ) H u − (h²/2ħ²) H² v`.
fn shift_v(stencil: &Stencil, bias: f64, u: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let a = h / HBAR_MEV_PS;
    let hu = stencil.applied(bias, u);
    let hv = stencil.applied(bias, v);
    let hhv = stencil.applied(bias, &hv);
    v.iter()
        .zip(&hu)
        .zip(&hhv)
        .map(|((v, hu), hhv)| v - a * hu - 0.5 * a * a * hhv)
        .collect()
}

pub(crate) fn stagger(wf: &Wavefunction1D, stencil: &Stencil, bias: f64, dt: f64) -> Staggered {
    Staggered {
        u: wf.u.clone(),
        v: shift_v(stencil, bias, &wf.u, &wf.v, dt / 2.0),
        time: wf.time,
        dt,
    }
}

/// Brings `v` back to the time of `u`.
pub(crate) fn synchronize(s: &Staggered, stencil: &Stencil, bias: f64) -> (Vec<f64>, Vec<f64>) {
    let h = s.dt / 2.0;
    let a = h / HBAR_MEV_PS;
    let hu = stencil.applied(bias, &s.u);
    let hv = stencil.applied(bias, &s.v);
    let hhv = stencil.applied(bias, &hv);
    let v: Vec<f64> =
        s.v.iter()
            .zip(&hu)
            .zip(&hhv)
            .map(|((v, hu), hhv)| v + a * hu + 0.5 * a * a * hhv)
            .collect();
    (s.u.clone(), v)
}

/// One staggered step; `bias_at` gives the bias in mV at any time.
pub(crate) fn step(s: &mut Staggered, stencil: &Stencil, bias_at: &dyn Fn(f64) -> f64) {
    let a = s.dt / HBAR_MEV_PS;
    let b_half = bias_at(s.time + 0.5 * s.dt);
    stencil.add_applied(b_half, a, &s.v, &mut s.u);
    let b_full = bias_at(s.time + s.dt);
    stencil.add_applied(b_full, -a, &s.u, &mut s.v);
    s.time += s.dt;
}

/// One leapfrog step on an already staggered state, at constant `spec`
/// bias. Checks the step against `ħ/E_max` first.
pub fn leapfrog_step(s: &mut Staggered, spec: &PotentialSpec, grid: &Grid1D) -> Result<()> {
    let stencil = Stencil::new(spec, grid);
    check_stability(s.dt, HBAR_MEV_PS / stencil.e_max(spec.v_bias))?;
    let bias = spec.v_bias;
    step(s, &stencil, &|_| bias);
    Ok(())
}
