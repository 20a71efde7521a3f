//! Effective two-level dynamics in the logical (left/right dot) basis.
//!
//! The Hamiltonian is `H = -(eps/2) σz + (delta/2) σx` with ħ = 1, so every
//! energy is measured in the unit of `QubitParams::delta` and every time in
//! ħ over that unit. With [`QubitParams::reduced`] the gap is 1 and the free
//! rotation period is 2π.

use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{wrap_angle, Real};

/// Reduced Planck constant in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Elementary charge in coulomb.
pub const E_CHARGE_C: f64 = 1.602_176_634e-19;

fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Normalized amplitude pair on the logical basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState<T> {
    pub a0: Complex<T>,
    pub a1: Complex<T>,
}

impl<T: Real> QubitState<T> {
    /// Builds a state, rejecting amplitudes whose norm is off by more than the
    /// scalar's check tolerance.
    pub fn new(a0: Complex<T>, a1: Complex<T>) -> Result<Self> {
        let s = Self { a0, a1 };
        if (s.norm_sqr() - T::one()).abs() > T::check_tol() {
            return Err(domain(format!(
                "state norm^2 = {} is not 1",
                s.norm_sqr().as_f64()
            )));
        }
        Ok(s)
    }

    /// Builds a state from arbitrary nonzero amplitudes by rescaling.
    pub fn normalized(a0: Complex<T>, a1: Complex<T>) -> Result<Self> {
        let n = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(domain("cannot normalize a zero or non-finite state"));
        }
        Ok(Self {
            a0: a0 / n,
            a1: a1 / n,
        })
    }

    pub fn zero() -> Self {
        Self {
            a0: Complex::new(T::one(), T::zero()),
            a1: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn one() -> Self {
        Self {
            a0: Complex::new(T::zero(), T::zero()),
            a1: Complex::new(T::one(), T::zero()),
        }
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn from_bloch_angles(theta: T, phi: T) -> Self {
        let half = theta / T::lit(2.0);
        Self {
            a0: Complex::new(half.cos(), T::zero()),
            a1: Complex::from_polar(half.sin(), phi),
        }
    }

    /// The +1 eigenstate of `axis · σ`.
    pub fn along(axis: BlochVector<T>) -> Result<Self> {
        let n = axis.unit()?;
        let theta = n.nz.max(-T::one()).min(T::one()).acos();
        let phi = n.ny.atan2(n.nx);
        Ok(Self::from_bloch_angles(theta, phi))
    }

    pub fn norm_sqr(&self) -> T {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    pub fn bloch_vector(&self) -> BlochVector<T> {
        let cross = self.a0.conj() * self.a1;
        let two = T::lit(2.0);
        BlochVector {
            nx: two * cross.re,
            ny: two * cross.im,
            nz: self.a0.norm_sqr() - self.a1.norm_sqr(),
        }
    }

    fn check_normalized(&self, what: &str) -> Result<()> {
        if (self.norm_sqr() - T::one()).abs() > T::check_tol() {
            return Err(domain(format!(
                "{what} has norm^2 = {}",
                self.norm_sqr().as_f64()
            )));
        }
        Ok(())
    }
}

/// Real 3-vector on or around the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector<T> {
    pub nx: T,
    pub ny: T,
    pub nz: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(nx: T, ny: T, nz: T) -> Self {
        Self { nx, ny, nz }
    }

    pub fn x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    /// Rotation axis realized at `eps = +delta`.
    pub fn x_prime() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::new(h, T::zero(), -h)
    }

    /// Rotation axis realized at `eps = -delta`.
    pub fn z_prime() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::new(h, T::zero(), h)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, o: &Self) -> T {
        self.nx * o.nx + self.ny * o.ny + self.nz * o.nz
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.ny * o.nz - self.nz * o.ny,
            self.nz * o.nx - self.nx * o.nz,
            self.nx * o.ny - self.ny * o.nx,
        )
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.nx * k, self.ny * k, self.nz * k)
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    /// Rescaled copy; errors on a zero vector.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(domain("cannot normalize a zero axis"));
        }
        Ok(self.scale(T::one() / n))
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - T::one()).abs() <= T::check_tol()
    }

    /// Returns the vector itself if it is unit-norm, otherwise an error.
    pub fn unit(&self) -> Result<Self> {
        if self.is_unit() {
            Ok(*self)
        } else {
            Err(domain(format!(
                "rotation axis has norm {}",
                self.norm().as_f64()
            )))
        }
    }
}

/// Device parameters of the qubit.
///
/// `delta` fixes the energy unit of all dynamics (ħ = 1); physical values are
/// in eV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams<T> {
    pub delta: T,
    pub lambda: T,
    pub e_charge: T,
}

impl<T: Real> QubitParams<T> {
    pub fn new(delta: T, lambda: T, e_charge: T) -> Result<Self> {
        if !(delta > T::zero()) || !(lambda > T::zero()) || !(e_charge > T::zero()) {
            return Err(domain("delta, lambda and e_charge must be positive"));
        }
        Ok(Self {
            delta,
            lambda,
            e_charge,
        })
    }

    /// Dimensionless units: gap, lever arm and charge all equal to one.
    pub fn reduced() -> Self {
        Self {
            delta: T::one(),
            lambda: T::one(),
            e_charge: T::one(),
        }
    }

    /// The reference double dot: 11.7 µeV gap, lever arm 0.421, energies in eV.
    pub fn reference_device() -> Self {
        Self {
            delta: T::lit(11.7e-6),
            lambda: T::lit(0.421),
            e_charge: T::lit(E_CHARGE_C),
        }
    }

    /// Free x-rotation period `2π / delta`.
    pub fn t_x(&self) -> T {
        T::TAU() / self.delta
    }

    /// Bias voltage (V) producing detuning `eps` (eV): `eps = e λ V`.
    pub fn bias_for_detuning_ev(&self, eps_ev: T) -> T {
        eps_ev / self.lambda
    }
}

/// 2×2 complex matrix, row-major.
pub type Matrix2<T> = [[Complex<T>; 2]; 2];

/// A single-qubit unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2<T> {
    pub u00: Complex<T>,
    pub u01: Complex<T>,
    pub u10: Complex<T>,
    pub u11: Complex<T>,
}

impl<T: Real> Unitary2<T> {
    pub fn identity() -> Self {
        let (o, z) = (c(T::one(), T::zero()), c(T::zero(), T::zero()));
        Self {
            u00: o,
            u01: z,
            u10: z,
            u11: o,
        }
    }

    /// Wraps a matrix without checking unitarity.
    pub fn from_matrix(m: Matrix2<T>) -> Self {
        Self {
            u00: m[0][0],
            u01: m[0][1],
            u10: m[1][0],
            u11: m[1][1],
        }
    }

    /// Wraps a matrix after checking unitarity.
    pub fn try_from_matrix(m: Matrix2<T>) -> Result<Self> {
        let u = Self::from_matrix(m);
        u.check_unitary()?;
        Ok(u)
    }

    pub fn matrix(&self) -> Matrix2<T> {
        [[self.u00, self.u01], [self.u10, self.u11]]
    }

    pub fn dagger(&self) -> Self {
        Self {
            u00: self.u00.conj(),
            u01: self.u10.conj(),
            u10: self.u01.conj(),
            u11: self.u11.conj(),
        }
    }

    pub fn det(&self) -> Complex<T> {
        self.u00 * self.u11 - self.u01 * self.u10
    }

    pub fn trace(&self) -> Complex<T> {
        self.u00 + self.u11
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self {
            u00: self.u00 * k,
            u01: self.u01 * k,
            u10: self.u10 * k,
            u11: self.u11 * k,
        }
    }

    pub fn apply(&self, s: &QubitState<T>) -> QubitState<T> {
        QubitState {
            a0: self.u00 * s.a0 + self.u01 * s.a1,
            a1: self.u10 * s.a0 + self.u11 * s.a1,
        }
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> T {
        let p = self.dagger() * *self;
        let one = c(T::one(), T::zero());
        [p.u00 - one, p.u01, p.u10, p.u11 - one]
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn check_unitary(&self) -> Result<()> {
        let err = self.unitarity_error();
        if !(err <= T::check_tol()) {
            return Err(domain(format!(
                "matrix is not unitary (|U†U - I| = {:e})",
                err.as_f64()
            )));
        }
        Ok(())
    }

    /// Rotation angle in `[0, 2π]` and axis of the SU(2) part of `self`.
    ///
    /// The global phase is stripped through the determinant, which fixes it
    /// only up to a sign, so `(a, n)` and `(2π - a, -n)` are both valid
    /// answers. [`Unitary2::canonical_rotation`] picks the `a ≤ π` one.
    pub fn rotation(&self) -> (T, BlochVector<T>) {
        let half = T::lit(0.5);
        let phase = self.det().arg() * half;
        let v = self.scale(Complex::from_polar(T::one(), -phase));
        let cos_half = (v.u00 + v.u11).re * half;
        let sx = -(v.u01 + v.u10).im * half;
        let sy = (v.u10 - v.u01).re * half;
        let sz = -(v.u00 - v.u11).im * half;
        let s = (sx * sx + sy * sy + sz * sz).sqrt();
        let angle = T::lit(2.0) * s.atan2(cos_half);
        let axis = if s > T::zero() {
            BlochVector::new(sx / s, sy / s, sz / s)
        } else {
            BlochVector::z()
        };
        (angle, axis)
    }

    /// Rotation angle in `[0, π]` and matching axis, ignoring global phase.
    pub fn canonical_rotation(&self) -> (T, BlochVector<T>) {
        let (angle, axis) = self.rotation();
        if angle > T::PI() {
            (T::TAU() - angle, axis.neg())
        } else {
            (angle, axis)
        }
    }
}

impl<T: Real> Mul for Unitary2<T> {
    type Output = Self;

    fn mul(self, r: Self) -> Self {
        Self {
            u00: self.u00 * r.u00 + self.u01 * r.u10,
            u01: self.u00 * r.u01 + self.u01 * r.u11,
            u10: self.u10 * r.u00 + self.u11 * r.u10,
            u11: self.u10 * r.u01 + self.u11 * r.u11,
        }
    }
}

/// Which way a quarter-sine ramp bends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    /// `from + (to - from) sin(πs/2)`: steep start, flat finish.
    Rising,
    /// `to + (from - to) cos(πs/2)`: flat start, steep finish.
    Falling,
}

/// One piece of a detuning waveform, with time measured from its start.
#[derive(Clone)]
pub enum Segment<T> {
    Flat {
        eps: T,
        duration: T,
    },
    Ramp {
        from: T,
        to: T,
        duration: T,
        edge: Edge,
    },
    Shaped {
        duration: T,
        shape: Arc<dyn Fn(T) -> T + Send + Sync>,
    },
}

impl<T: Real> Segment<T> {
    pub fn duration(&self) -> T {
        match self {
            Segment::Flat { duration, .. }
            | Segment::Ramp { duration, .. }
            | Segment::Shaped { duration, .. } => *duration,
        }
    }

    pub fn value(&self, t: T) -> T {
        match self {
            Segment::Flat { eps, .. } => *eps,
            Segment::Ramp {
                from,
                to,
                duration,
                edge,
            } => {
                if *duration <= T::zero() {
                    return *to;
                }
                let phase = T::FRAC_PI_2() * (t / *duration).max(T::zero()).min(T::one());
                match edge {
                    Edge::Rising => *from + (*to - *from) * phase.sin(),
                    Edge::Falling => *to + (*from - *to) * phase.cos(),
                }
            }
            Segment::Shaped { shape, .. } => shape(t),
        }
    }

    fn shifted(&self, offset: T) -> Self {
        match self {
            Segment::Flat { eps, duration } => Segment::Flat {
                eps: *eps + offset,
                duration: *duration,
            },
            Segment::Ramp {
                from,
                to,
                duration,
                edge,
            } => Segment::Ramp {
                from: *from + offset,
                to: *to + offset,
                duration: *duration,
                edge: *edge,
            },
            Segment::Shaped { duration, shape } => {
                let shape = Arc::clone(shape);
                Segment::Shaped {
                    duration: *duration,
                    shape: Arc::new(move |t| shape(t) + offset),
                }
            }
        }
    }

    fn max_abs(&self) -> T {
        match self {
            Segment::Flat { eps, .. } => eps.abs(),
            Segment::Ramp { from, to, .. } => from.abs().max(to.abs()),
            Segment::Shaped { duration, shape } => {
                let n = 1024;
                (0..=n).fold(T::zero(), |m, k| {
                    let t = *duration * T::lit(k as f64 / n as f64);
                    m.max(shape(t).abs())
                })
            }
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Segment<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Flat { eps, duration } => f
                .debug_struct("Flat")
                .field("eps", eps)
                .field("duration", duration)
                .finish(),
            Segment::Ramp {
                from,
                to,
                duration,
                edge,
            } => f
                .debug_struct("Ramp")
                .field("from", from)
                .field("to", to)
                .field("duration", duration)
                .field("edge", edge)
                .finish(),
            Segment::Shaped { duration, .. } => f
                .debug_struct("Shaped")
                .field("duration", duration)
                .finish_non_exhaustive(),
        }
    }
}

/// Detuning as a function of time, built from consecutive segments.
#[derive(Clone, Debug, Default)]
pub struct DetuningWaveform<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Real> DetuningWaveform<T> {
    pub fn new() -> Self {
        Self {
            segments: Vec::new(),
        }
    }

    pub fn constant(eps: T, duration: T) -> Self {
        let mut w = Self::new();
        w.push_flat(eps, duration);
        w
    }

    /// Closed-form waveform `t -> f(t)` on `[0, duration]`.
    pub fn from_fn(duration: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        let mut w = Self::new();
        w.push(Segment::Shaped {
            duration,
            shape: Arc::new(f),
        });
        w
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// Appends a segment; zero-length segments are dropped.
    pub fn push(&mut self, seg: Segment<T>) {
        if seg.duration() > T::zero() {
            self.segments.push(seg);
        }
    }

    pub fn push_flat(&mut self, eps: T, duration: T) {
        self.push(Segment::Flat { eps, duration });
    }

    pub fn push_ramp(&mut self, from: T, to: T, duration: T, edge: Edge) {
        self.push(Segment::Ramp {
            from,
            to,
            duration,
            edge,
        });
    }

    pub fn append(&mut self, other: &Self) {
        self.segments.extend(other.segments.iter().cloned());
    }

    pub fn duration(&self) -> T {
        self.segments
            .iter()
            .fold(T::zero(), |acc, s| acc + s.duration())
    }

    /// Detuning at time `t`; zero outside `[0, duration]`.
    pub fn value_at(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        let mut start = T::zero();
        for seg in &self.segments {
            let end = start + seg.duration();
            if t <= end {
                return seg.value(t - start);
            }
            start = end;
        }
        T::zero()
    }

    pub fn max_abs(&self) -> T {
        self.segments
            .iter()
            .fold(T::zero(), |m, s| m.max(s.max_abs()))
    }

    /// Copy with a constant added to every sample (quasistatic noise).
    pub fn with_offset(&self, offset: T) -> Self {
        Self {
            segments: self.segments.iter().map(|s| s.shifted(offset)).collect(),
        }
    }

    /// The waveform truncated to `[0, t_end]`.
    pub fn truncated(&self, t_end: T) -> Self {
        let mut out = Self::new();
        let mut start = T::zero();
        for seg in &self.segments {
            if start >= t_end {
                break;
            }
            let d = seg.duration();
            if start + d <= t_end {
                out.push(seg.clone());
            } else {
                let keep = t_end - start;
                let seg = seg.clone();
                out.push(Segment::Shaped {
                    duration: keep,
                    shape: Arc::new(move |t| seg.value(t)),
                });
            }
            start = start + d;
        }
        out
    }

    /// `(t, eps)` samples every `dt`, always including both end points.
    pub fn sample(&self, dt: T) -> Vec<(T, T)> {
        let total = self.duration();
        if !(dt > T::zero()) || total <= T::zero() {
            return vec![(T::zero(), self.value_at(T::zero()))];
        }
        let n = (total / dt).ceil().to_usize().unwrap_or(1).max(1);
        (0..=n)
            .map(|k| {
                let t = total * T::lit(k as f64 / n as f64);
                (t, self.value_at(t))
            })
            .collect()
    }

    /// Integration steps `(eps at step midpoint, step length)`.
    ///
    /// Flat segments are a single exact step; everything else is split into
    /// equal steps no longer than `dt_max`.
    fn steps(&self, dt_max: T) -> impl Iterator<Item = (T, T)> + '_ {
        self.segments.iter().flat_map(move |seg| {
            let d = seg.duration();
            let n = match seg {
                Segment::Flat { .. } => 1,
                _ => (d / dt_max).ceil().to_usize().unwrap_or(1).max(1),
            };
            let h = d / T::lit(n as f64);
            (0..n).map(move |k| {
                let mid = h * (T::lit(k as f64) + T::lit(0.5));
                (seg.value(mid), h)
            })
        })
    }
}

/// `-(eps/2) σz + (delta/2) σx`.
pub fn effective_hamiltonian<T: Real>(eps: T, params: &QubitParams<T>) -> Matrix2<T> {
    let half = T::lit(0.5);
    let zero = T::zero();
    [
        [c(-eps * half, zero), c(params.delta * half, zero)],
        [c(params.delta * half, zero), c(eps * half, zero)],
    ]
}

/// `exp(-i H t)` for constant detuning.
fn step_unitary<T: Real>(eps: T, delta: T, t: T) -> Unitary2<T> {
    let omega = (delta * delta + eps * eps).sqrt();
    if omega == T::zero() {
        return Unitary2::identity();
    }
    let half = omega * t * T::lit(0.5);
    let (s, co) = half.sin_cos();
    let nx = delta / omega;
    let nz = -eps / omega;
    Unitary2 {
        u00: c(co, -s * nz),
        u01: c(T::zero(), -s * nx),
        u10: c(T::zero(), -s * nx),
        u11: c(co, s * nz),
    }
}

/// `exp(-i angle (n·σ)/2)`.
pub fn square_pulse_unitary<T: Real>(axis: BlochVector<T>, angle: T) -> Result<Unitary2<T>> {
    let n = axis.unit()?;
    Ok(rotation_unchecked(n, angle))
}

pub(crate) fn rotation_unchecked<T: Real>(n: BlochVector<T>, angle: T) -> Unitary2<T> {
    let (s, co) = (angle * T::lit(0.5)).sin_cos();
    Unitary2 {
        u00: c(co, -s * n.nz),
        u01: c(-s * n.ny, -s * n.nx),
        u10: c(s * n.ny, -s * n.nx),
        u11: c(co, s * n.nz),
    }
}

fn check_dt<T: Real>(dt_max: T, params: &QubitParams<T>) -> Result<()> {
    if !(dt_max > T::zero()) {
        return Err(domain(format!(
            "dt_max must be positive, got {}",
            dt_max.as_f64()
        )));
    }
    let floor = params.t_x() / T::lit(1000.0);
    if dt_max > floor * (T::one() + T::epsilon()) {
        return Err(domain(format!(
            "dt_max = {} exceeds t_x/1000 = {}",
            dt_max.as_f64(),
            floor.as_f64()
        )));
    }
    Ok(())
}

/// Default step bound `t_x / 20000`.
pub fn default_dt<T: Real>(params: &QubitParams<T>) -> T {
    params.t_x() / T::lit(20_000.0)
}

/// Time-ordered evolution of `state` under `waveform`.
pub fn propagate<T: Real>(
    state: &QubitState<T>,
    waveform: &DetuningWaveform<T>,
    params: &QubitParams<T>,
    dt_max: T,
) -> Result<QubitState<T>> {
    state.check_normalized("initial state")?;
    check_dt(dt_max, params)?;
    Ok(waveform.steps(dt_max).fold(*state, |s, (eps, h)| {
        step_unitary(eps, params.delta, h).apply(&s)
    }))
}

/// Evolution operator of `waveform`.
pub fn realized_unitary<T: Real>(
    waveform: &DetuningWaveform<T>,
    params: &QubitParams<T>,
    dt_max: T,
) -> Result<Unitary2<T>> {
    check_dt(dt_max, params)?;
    Ok(waveform
        .steps(dt_max)
        .fold(Unitary2::identity(), |u, (eps, h)| {
            step_unitary(eps, params.delta, h) * u
        }))
}

/// Bloch vectors sampled along the evolution, at least every `sample_dt`.
pub fn trajectory<T: Real>(
    state: &QubitState<T>,
    waveform: &DetuningWaveform<T>,
    params: &QubitParams<T>,
    dt_max: T,
    sample_dt: T,
) -> Result<Vec<(T, QubitState<T>)>> {
    state.check_normalized("initial state")?;
    check_dt(dt_max, params)?;
    let mut out = vec![(T::zero(), *state)];
    let mut t = T::zero();
    let mut next = sample_dt;
    let mut s = *state;
    for (eps, h) in waveform.steps(dt_max.min(sample_dt)) {
        s = step_unitary(eps, params.delta, h).apply(&s);
        t = t + h;
        if t >= next * (T::one() - T::lit(1e-9)) {
            out.push((t, s));
            while next <= t {
                next = next + sample_dt;
            }
        }
    }
    if out.last().map(|(tl, _)| *tl < t).unwrap_or(true) {
        out.push((t, s));
    }
    Ok(out)
}

/// `|Tr(U† V)| / 2`.
pub fn process_fidelity<T: Real>(u: &Unitary2<T>, v: &Unitary2<T>) -> Result<T> {
    u.check_unitary()?;
    v.check_unitary()?;
    let f = (u.dagger() * *v).trace().norm() * T::lit(0.5);
    Ok(f.min(T::one()))
}

/// `|⟨a|b⟩|²`.
pub fn state_fidelity<T: Real>(a: &QubitState<T>, b: &QubitState<T>) -> Result<T> {
    a.check_normalized("first state")?;
    b.check_normalized("second state")?;
    Ok(a.inner(b).norm_sqr().min(T::one()))
}

/// `n` near-uniform points on the Bloch sphere (Fibonacci lattice), as
/// `(theta, phi)` pairs. Deterministic; no two points coincide.
pub fn fibonacci_sphere<T: Real>(n: usize) -> Vec<(T, T)> {
    let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    let nn = T::lit(n as f64);
    (0..n)
        .map(|i| {
            let z = T::one() - T::lit(2.0) * (T::lit(i as f64) + T::lit(0.5)) / nn;
            let phi = wrap_angle(golden * T::lit(i as f64));
            (z.max(-T::one()).min(T::one()).acos(), phi)
        })
        .collect()
}

/// Polar angle in `[0, π]` and azimuth in `[0, 2π)`; azimuth is 0 at the poles.
pub fn bloch_angles<T: Real>(state: &QubitState<T>) -> (T, T) {
    let r0 = state.a0.norm();
    let r1 = state.a1.norm();
    let theta = T::lit(2.0) * r1.atan2(r0);
    let tiny = T::epsilon() * T::lit(16.0);
    let phi = if r0 <= tiny || r1 <= tiny {
        T::zero()
    } else {
        wrap_angle(state.a1.arg() - state.a0.arg())
    };
    (theta, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    type S = QubitState<f64>;

    fn reduced() -> QubitParams<f64> {
        QubitParams::reduced()
    }

    fn splitting(h: Matrix2<f64>) -> f64 {
        let a = h[0][0].re;
        let b = h[0][1];
        2.0 * (a * a + b.norm_sqr()).sqrt()
    }

    #[test]
    fn hamiltonian_splittings() {
        let p = reduced();
        assert!((splitting(effective_hamiltonian(0.0, &p)) - 1.0).abs() < 1e-15);
        assert!((splitting(effective_hamiltonian(1.0, &p)) - 2f64.sqrt()).abs() < 1e-15);
        let h = effective_hamiltonian(0.3, &p);
        assert!((h[0][0] + h[1][1]).norm() < 1e-15);
        assert_eq!(h[0][1], h[1][0].conj());

        let dev = QubitParams::<f64>::reference_device();
        let s = splitting(effective_hamiltonian(dev.delta, &dev));
        assert!((s * 1e6 - 16.546).abs() < 1e-3, "{s}");
    }

    #[test]
    fn square_pulse_examples() {
        let u = square_pulse_unitary(BlochVector::x(), PI).unwrap();
        let s = u.apply(&S::zero());
        assert!(s.a0.norm() < 1e-15);
        assert!((s.a1 - Complex::new(0.0, -1.0)).norm() < 1e-15);

        let id = square_pulse_unitary(BlochVector::z(), 0.0).unwrap();
        assert_eq!(id, Unitary2::identity());

        let full = square_pulse_unitary(BlochVector::x_prime(), TAU).unwrap();
        let minus = Unitary2::identity().scale(Complex::new(-1.0, 0.0));
        assert!((full.u00 - minus.u00).norm() < 1e-15 && full.u01.norm() < 1e-15);

        assert!(square_pulse_unitary(BlochVector::new(1.0, 1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn xzx_at_pi_is_x_gate() {
        let h = PI / 2.0;
        let xp = square_pulse_unitary(BlochVector::x_prime(), h).unwrap();
        let zp = square_pulse_unitary(BlochVector::z_prime(), h).unwrap();
        let target = square_pulse_unitary(BlochVector::x(), PI).unwrap();
        let f = process_fidelity(&(xp * zp * xp), &target).unwrap();
        assert!(1.0 - f < 1e-14);
    }

    #[test]
    fn detuning_sign_selects_axis() {
        let p = reduced();
        let dt = default_dt(&p);
        let half = TAU / 2f64.sqrt() / 2.0;
        let u = realized_unitary(&DetuningWaveform::constant(1.0, half), &p, dt).unwrap();
        let xp = square_pulse_unitary(BlochVector::x_prime(), PI).unwrap();
        assert!(1.0 - process_fidelity(&u, &xp).unwrap() < 1e-14);
        let u = realized_unitary(&DetuningWaveform::constant(-1.0, half), &p, dt).unwrap();
        let zp = square_pulse_unitary(BlochVector::z_prime(), PI).unwrap();
        assert!(1.0 - process_fidelity(&u, &zp).unwrap() < 1e-14);
    }

    #[test]
    fn propagate_examples() {
        let p = reduced();
        let dt = default_dt(&p);
        let s = propagate(&S::zero(), &DetuningWaveform::constant(0.0, PI), &p, dt).unwrap();
        assert!(1.0 - state_fidelity(&s, &S::one()).unwrap() < 1e-14);

        let psi = S::from_bloch_angles(0.7, 1.9);
        let full = DetuningWaveform::constant(1.0, TAU / 2f64.sqrt());
        let s = propagate(&psi, &full, &p, dt).unwrap();
        assert!(1.0 - state_fidelity(&s, &psi).unwrap() < 1e-14);

        assert!(propagate(&psi, &full, &p, 0.0).is_err());
        assert!(propagate(&psi, &full, &p, -1.0).is_err());
        assert!(propagate(&psi, &full, &p, 0.1).is_err());
    }

    #[test]
    fn zero_duration_is_identity() {
        let p = reduced();
        let u = realized_unitary(&DetuningWaveform::new(), &p, default_dt(&p)).unwrap();
        assert_eq!(u, Unitary2::identity());
    }

    #[test]
    fn fidelity_examples() {
        let i = Unitary2::<f64>::identity();
        assert!((process_fidelity(&i, &i).unwrap() - 1.0).abs() < 1e-15);
        let phased = i.scale(Complex::from_polar(1.0, 0.83));
        assert!((process_fidelity(&i, &phased).unwrap() - 1.0).abs() < 1e-15);
        let sx = square_pulse_unitary(BlochVector::x(), PI).unwrap();
        assert!(process_fidelity(&i, &sx).unwrap() < 1e-15);
        let bad = Unitary2::from_matrix([[Complex::new(2.0, 0.0); 2]; 2]);
        assert!(process_fidelity(&i, &bad).is_err());

        let plus = S::normalized(Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)).unwrap();
        assert_eq!(state_fidelity(&S::zero(), &S::zero()).unwrap(), 1.0);
        assert_eq!(state_fidelity(&S::zero(), &S::one()).unwrap(), 0.0);
        assert!((state_fidelity(&S::zero(), &plus).unwrap() - 0.5).abs() < 1e-15);
        let unnorm = S {
            a0: Complex::new(1.0, 0.0),
            a1: Complex::new(1.0, 0.0),
        };
        assert!(state_fidelity(&S::zero(), &unnorm).is_err());
    }

    #[test]
    fn fibonacci_points_cover_sphere() {
        let pts = fibonacci_sphere::<f64>(500);
        assert_eq!(pts.len(), 500);
        let mean = pts.iter().fold([0.0; 3], |m, (t, p)| {
            [
                m[0] + t.sin() * p.cos(),
                m[1] + t.sin() * p.sin(),
                m[2] + t.cos(),
            ]
        });
        for c in mean {
            assert!((c / 500.0).abs() < 1e-2);
        }
        assert!(pts
            .iter()
            .all(|(t, p)| (0.0..=PI).contains(t) && (0.0..TAU).contains(p)));
    }

    #[test]
    fn bloch_angle_examples() {
        assert_eq!(bloch_angles(&S::zero()), (0.0, 0.0));
        let (t, p) = bloch_angles(&S::one());
        assert!((t - PI).abs() < 1e-15 && p == 0.0);
        let s = S {
            a0: Complex::new(FRAC_1_SQRT_2, 0.0),
            a1: Complex::new(0.0, FRAC_1_SQRT_2),
        };
        let (t, p) = bloch_angles(&s);
        assert!((t - PI / 2.0).abs() < 1e-15 && (p - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_extraction_roundtrip() {
        let axis = BlochVector::new(0.3, -0.5, 0.2).normalize().unwrap();
        let u = square_pulse_unitary(axis, 2.2).unwrap();
        let (a, n) = u.rotation();
        let v = square_pulse_unitary(n, a).unwrap();
        assert!(1.0 - process_fidelity(&u, &v).unwrap() < 1e-14);
        let (a, _) = u.canonical_rotation();
        assert!(a <= PI);
    }

    #[test]
    fn waveform_bookkeeping() {
        let mut w = DetuningWaveform::<f64>::new();
        w.push_ramp(0.0, 1.5, 0.2, Edge::Rising);
        w.push_flat(1.5, 0.7);
        w.push_ramp(1.5, 0.0, 0.2, Edge::Falling);
        w.push_flat(3.0, 0.0);
        assert_eq!(w.segments().len(), 3);
        assert!((w.duration() - 1.1).abs() < 1e-15);
        assert_eq!(w.max_abs(), 1.5);
        assert_eq!(w.value_at(0.0), 0.0);
        assert!((w.value_at(0.2) - 1.5).abs() < 1e-15);
        assert!(w.value_at(1.1).abs() < 1e-15);
        assert!((w.with_offset(0.1).value_at(0.5) - 1.6).abs() < 1e-15);
        let s = w.sample(0.01);
        assert_eq!(s.first().unwrap().0, 0.0);
        assert!((s.last().unwrap().0 - 1.1).abs() < 1e-15);
        assert!((w.truncated(0.5).duration() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_precision_square_pulse() {
        let p = QubitParams::<f32>::reduced();
        let u = realized_unitary(
            &DetuningWaveform::constant(1.0f32, std::f32::consts::PI / 2f32.sqrt()),
            &p,
            default_dt(&p),
        )
        .unwrap();
        let v = square_pulse_unitary(BlochVector::<f32>::x_prime(), std::f32::consts::PI).unwrap();
        assert!(1.0 - process_fidelity(&u, &v).unwrap() < 1e-5);
    }
}
