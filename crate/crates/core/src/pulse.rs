//! Time-domain detuning pulses for x′/z′ rotations.
//!
//! Pulse durations (`tau`, `flat_duration`, `delta_t`) are fractions of the
//! free rotation period `t_x`; amplitudes are multiples of the gap `delta`.
//!
//! A ramped pulse rises over `tau` as a quarter sine to `±xi·delta`, holds,
//! and falls back symmetrically. `delta_t` is the extra time relative to the
//! ideal square pulse, ramps included, so the flat top lasts
//! `t_square + delta_t - 2 tau`.

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationTable;
use crate::decomposition::{
    decompose_axis, theta_angles_xz, DecompositionResult, PrimitiveRotation, PulseAxis,
    RotationSpec, Scheme, XzAxis,
};
use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::two_level::{
    default_dt, realized_unitary, BlochVector, DetuningWaveform, Edge, QubitParams,
};

/// Edge profile of a realistic pulse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RiseShape {
    #[default]
    Sine,
}

/// Full 0→100 % ramp time, as a fraction of `t_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiseSpec<T> {
    pub tau: T,
    pub shape: RiseShape,
}

impl<T: Real> RiseSpec<T> {
    pub fn square() -> Self {
        Self {
            tau: T::zero(),
            shape: RiseShape::Sine,
        }
    }

    pub fn sine(tau: T) -> Result<Self> {
        if !(tau >= T::zero()) || !tau.is_finite() {
            return Err(domain("rise time must be finite and nonnegative"));
        }
        Ok(Self {
            tau,
            shape: RiseShape::Sine,
        })
    }

    /// Converts an instrument rise time quoted between two amplitude levels
    /// (e.g. 0.2 and 0.8) into the full quarter-sine ramp time.
    pub fn from_partial_rise(t_partial: T, lo: T, hi: T) -> Result<Self> {
        if !(T::zero() <= lo && lo < hi && hi <= T::one()) {
            return Err(domain("rise levels must satisfy 0 <= lo < hi <= 1"));
        }
        let frac = (hi.asin() - lo.asin()) / T::FRAC_PI_2();
        Self::sine(t_partial / frac)
    }

    pub fn is_square(&self) -> bool {
        self.tau == T::zero()
    }
}

/// One trapezoid-like pulse of constant sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment<T> {
    pub amplitude: T,
    pub flat_duration: T,
    pub rise: RiseSpec<T>,
}

impl<T: Real> PulseSegment<T> {
    pub fn duration(&self) -> T {
        self.flat_duration + T::lit(2.0) * self.rise.tau
    }

    fn append_to(&self, w: &mut DetuningWaveform<T>, params: &QubitParams<T>) {
        let peak = self.amplitude * params.delta;
        let ramp = self.rise.tau * params.t_x();
        w.push_ramp(T::zero(), peak, ramp, Edge::Rising);
        w.push_flat(peak, self.flat_duration * params.t_x());
        w.push_ramp(peak, T::zero(), ramp, Edge::Falling);
    }
}

/// Back-to-back pulses with optional free evolution in between.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain<T> {
    pub segments: Vec<PulseSegment<T>>,
    pub gap: T,
}

impl<T: Real> PulseTrain<T> {
    pub fn new(segments: Vec<PulseSegment<T>>) -> Self {
        Self {
            segments,
            gap: T::zero(),
        }
    }

    pub fn duration(&self) -> T {
        let n = self.segments.len();
        let gaps = if n > 1 {
            T::lit((n - 1) as f64) * self.gap
        } else {
            T::zero()
        };
        self.segments.iter().fold(gaps, |acc, s| acc + s.duration())
    }

    pub fn waveform(&self, params: &QubitParams<T>) -> DetuningWaveform<T> {
        let mut w = DetuningWaveform::new();
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                w.push_flat(T::zero(), self.gap * params.t_x());
            }
            seg.append_to(&mut w, params);
        }
        w
    }
}

/// Amplitude and duration correction for one (rise time, angle) pair.
///
/// In complement mode the rotation is produced by two identical pulses of
/// angle `(target + 2π)/2`, both carrying this `xi` and `delta_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionEntry<T> {
    pub tau: T,
    pub target_angle: T,
    pub xi: T,
    pub delta_t: T,
    pub residual_error: T,
    #[serde(default)]
    pub complement: bool,
}

impl<T: Real> CorrectionEntry<T> {
    /// Square-pulse entry: no ramp, no correction.
    pub fn ideal(angle: T) -> Self {
        Self {
            tau: T::zero(),
            target_angle: angle,
            xi: T::one(),
            delta_t: T::zero(),
            residual_error: T::zero(),
            complement: false,
        }
    }

    /// Rotation angle of each physical pulse and how many are played.
    pub fn pulse_plan(&self) -> (T, usize) {
        if self.complement {
            ((self.target_angle + T::TAU()) / T::lit(2.0), 2)
        } else {
            (self.target_angle, 1)
        }
    }

    /// Smallest `delta_t` that keeps the flat top nonnegative.
    pub fn min_delta_t(tau: T, pulse_angle: T) -> T {
        T::lit(2.0) * tau - square_duration_fraction(pulse_angle)
    }

    pub fn segments(&self, axis: PulseAxis) -> Result<Vec<PulseSegment<T>>> {
        let (angle, count) = self.pulse_plan();
        let flat = square_duration_fraction(angle) + self.delta_t - T::lit(2.0) * self.tau;
        let slack = T::epsilon() * T::lit(64.0);
        if flat < -slack {
            return Err(domain(format!(
                "correction leaves a negative flat top ({})",
                flat.as_f64()
            )));
        }
        if !(self.xi > T::zero()) {
            return Err(domain("amplitude factor xi must be positive"));
        }
        let seg = PulseSegment {
            amplitude: axis.detuning_sign::<T>() * self.xi,
            flat_duration: flat.max(T::zero()),
            rise: RiseSpec {
                tau: self.tau,
                shape: RiseShape::Sine,
            },
        };
        Ok(vec![seg; count])
    }
}

/// Square-pulse duration for `angle` at `|eps| = delta`, in units of `t_x`.
pub fn square_duration_fraction<T: Real>(angle: T) -> T {
    angle / (T::TAU() * T::SQRT_2())
}

/// Ideal square pulse for a primitive rotation.
pub fn square_waveform<T: Real>(
    primitive: &PrimitiveRotation<T>,
    params: &QubitParams<T>,
) -> DetuningWaveform<T> {
    let eps = primitive.axis.detuning_sign::<T>() * params.delta;
    let omega = params.delta * T::SQRT_2();
    DetuningWaveform::constant(eps, primitive.angle / omega)
}

/// Sine-ramped pulse carrying a calibrated correction.
pub fn ramped_waveform<T: Real>(
    primitive: &PrimitiveRotation<T>,
    rise: &RiseSpec<T>,
    correction: &CorrectionEntry<T>,
    params: &QubitParams<T>,
) -> Result<DetuningWaveform<T>> {
    let tol = T::lit(1e-9);
    if (correction.tau - rise.tau).abs() > tol
        || (correction.target_angle - primitive.angle).abs() > tol
    {
        return Err(domain(format!(
            "correction for (tau {}, angle {}) used for (tau {}, angle {})",
            correction.tau.as_f64(),
            correction.target_angle.as_f64(),
            rise.tau.as_f64(),
            primitive.angle.as_f64()
        )));
    }
    Ok(PulseTrain::new(correction.segments(primitive.axis)?).waveform(params))
}

/// Zero-flat-top pulse whose rotation axis is exactly x′.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimumLobe<T> {
    pub tau: T,
    pub xi: T,
    pub angle: T,
}

/// Signed tilt of a lobe's rotation axis away from x′ (towards z′), and its
/// rotation angle about the x′-leaning axis.
fn lobe_axis<T: Real>(tau: T, xi: T, params: &QubitParams<T>) -> Result<(T, T)> {
    let seg = PulseSegment {
        amplitude: xi,
        flat_duration: T::zero(),
        rise: RiseSpec::sine(tau)?,
    };
    let u = realized_unitary(
        &PulseTrain::new(vec![seg]).waveform(params),
        params,
        default_dt(params),
    )?;
    let (angle, axis) = u.rotation();
    let along_x = axis.dot(&BlochVector::x_prime());
    let along_z = axis.dot(&BlochVector::z_prime());
    if along_x >= T::zero() {
        Ok((along_z, angle))
    } else {
        Ok((-along_z, T::TAU() - angle))
    }
}

/// Finds the amplitude at which a pure sine lobe of width `2 tau` rotates
/// about x′, together with the angle it then produces.
pub fn minimum_lobe<T: Real>(tau: T, params: &QubitParams<T>) -> Result<MinimumLobe<T>> {
    if !(tau > T::zero()) {
        return Err(domain("minimum lobe needs a positive rise time"));
    }
    let growth = T::lit(1.05);
    let mut lo = T::one();
    let (mut g_lo, _) = lobe_axis(tau, lo, params)?;
    let mut hi = lo;
    let mut bracketed = false;
    for _ in 0..200 {
        hi = lo * growth;
        let (g_hi, _) = lobe_axis(tau, hi, params)?;
        if g_hi.signum() != g_lo.signum() {
            bracketed = true;
            break;
        }
        lo = hi;
        g_lo = g_hi;
    }
    if !bracketed {
        return Err(Error::NoConvergence {
            what: "minimum-angle amplitude bracket".into(),
            residual: g_lo.as_f64(),
        });
    }
    for _ in 0..80 {
        let mid = (lo + hi) / T::lit(2.0);
        let (g_mid, _) = lobe_axis(tau, mid, params)?;
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi * T::lit(4.0) {
            break;
        }
    }
    let xi = (lo + hi) / T::lit(2.0);
    let (_, angle) = lobe_axis(tau, xi, params)?;
    Ok(MinimumLobe { tau, xi, angle })
}

/// Smallest x′ rotation a single ramped pulse can produce at rise time `tau`.
pub fn min_angle<T: Real>(tau: T, params: &QubitParams<T>) -> Result<T> {
    if tau <= T::zero() {
        return Ok(T::zero());
    }
    Ok(minimum_lobe(tau, params)?.angle)
}

/// Rise times whose minimum angle is π/8, π/6, π/4, π/3 and π/2, in that
/// order, found by bisection on [`min_angle`].
pub const REFERENCE_TAUS: [f64; 5] = [
    0.022_132_683_548_210,
    0.029_547_345_897_808,
    0.044_481_377_739_560,
    0.059_612_379_922_626,
    0.090_765_670_303_353,
];

/// Target minimum angles matching [`REFERENCE_TAUS`].
pub const REFERENCE_MIN_ANGLES: [f64; 5] = [
    std::f64::consts::FRAC_PI_8,
    std::f64::consts::FRAC_PI_6,
    std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_3,
    std::f64::consts::FRAC_PI_2,
];

/// Bisection for the rise time whose minimum angle equals `angle`.
pub fn tau_for_min_angle<T: Real>(angle: T, params: &QubitParams<T>) -> Result<T> {
    let mut lo = T::lit(1e-4);
    let mut hi = T::lit(0.5);
    if min_angle(lo, params)? > angle || min_angle(hi, params)? < angle {
        return Err(domain(
            "requested minimum angle outside the searchable range",
        ));
    }
    for _ in 0..60 {
        let mid = (lo + hi) / T::lit(2.0);
        if min_angle(mid, params)? < angle {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// A lab-axis rotation split into equal pieces, each built from x′/z′ pulses.
#[derive(Clone, Debug, PartialEq)]
pub struct Subdivision<T> {
    /// Number of equal `R(angle / pieces)` factors.
    pub pieces: usize,
    /// Pulses in application order; adjacent same-axis pulses are fused.
    pub primitives: Vec<PrimitiveRotation<T>>,
    /// True when some pulse is below the minimum angle and must be played in
    /// complement mode.
    pub complement: bool,
}

impl<T: Real> Subdivision<T> {
    pub fn result(&self) -> DecompositionResult<T> {
        DecompositionResult {
            primitives: self.primitives.clone(),
            scheme: Scheme::Subdivided,
        }
    }
}

/// Pulse list for a rotation about a lab axis (x̂, ŷ or ẑ) written as
/// `pieces` equal rotations.
pub fn rotation_pieces<T: Real>(
    axis: BlochVector<T>,
    angle: T,
    pieces: usize,
) -> Result<DecompositionResult<T>> {
    if pieces == 0 {
        return Err(domain("need at least one piece"));
    }
    let piece = decompose_axis(&RotationSpec::new(axis, angle / T::lit(pieces as f64))?)?;
    let mut parts = Vec::with_capacity(piece.len() * pieces);
    for _ in 0..pieces {
        parts.extend(piece.primitives.iter().map(|p| (p.axis, p.angle)));
    }
    Ok(DecompositionResult::from_angles(Scheme::Subdivided, &parts))
}

/// `R_x(angle)` written as `pieces` equal x rotations.
pub fn x_rotation_pieces<T: Real>(angle: T, pieces: usize) -> DecompositionResult<T> {
    let (t1, t2) = theta_angles_xz(angle / T::lit(pieces.max(1) as f64), XzAxis::X);
    let mut parts = Vec::with_capacity(3 * pieces);
    for _ in 0..pieces {
        parts.push((PulseAxis::XPrime, t1));
        parts.push((PulseAxis::ZPrime, t2));
        parts.push((PulseAxis::XPrime, t1));
    }
    DecompositionResult::from_angles(Scheme::Subdivided, &parts)
}

/// Splits a lab-axis rotation into the largest number of equal pieces whose
/// pulses all stay at or above the minimum angle for `tau`.
///
/// When even a single piece needs a pulse below the minimum, the undivided
/// form is returned with `complement` set.
pub fn subdivide<T: Real>(
    axis: BlochVector<T>,
    angle: T,
    tau: T,
    params: &QubitParams<T>,
) -> Result<Subdivision<T>> {
    if !(angle > T::zero()) || angle >= T::TAU() {
        return Err(domain("subdivision angle must lie in (0, 2π)"));
    }
    let floor = min_angle(tau, params)? * (T::one() - T::lit(1e-9));
    let feasible = |r: &DecompositionResult<T>| r.primitives.iter().all(|p| p.angle >= floor);
    let single = rotation_pieces(axis, angle, 1)?;
    if !feasible(&single) {
        return Ok(Subdivision {
            pieces: 1,
            primitives: single.primitives,
            complement: true,
        });
    }
    let mut best = (1, single);
    for k in 2..=4096 {
        let r = rotation_pieces(axis, angle, k)?;
        if !feasible(&r) {
            break;
        }
        best = (k, r);
    }
    Ok(Subdivision {
        pieces: best.0,
        primitives: best.1.primitives,
        complement: false,
    })
}

/// [`subdivide`] about x̂.
pub fn subdivide_x<T: Real>(angle: T, tau: T, params: &QubitParams<T>) -> Result<Subdivision<T>> {
    subdivide(BlochVector::x(), angle, tau, params)
}

/// Concatenated waveform for a decomposition at rise time `rise.tau`.
///
/// Square edges need no table; otherwise every primitive is resolved
/// through `table`, which may interpolate and re-verify.
pub fn train_waveform(
    result: &DecompositionResult<f64>,
    rise: &RiseSpec<f64>,
    table: &CalibrationTable,
    params: &QubitParams<f64>,
) -> Result<DetuningWaveform<f64>> {
    let mut w = DetuningWaveform::new();
    for p in &result.primitives {
        if rise.is_square() {
            w.append(&square_waveform(p, params));
        } else {
            let entry = table.resolve(rise.tau, p.angle, params)?;
            w.append(&ramped_waveform(p, rise, &entry, params)?);
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_level::{process_fidelity, square_pulse_unitary};
    use std::f64::consts::{FRAC_PI_8, PI, TAU};

    fn reduced() -> QubitParams<f64> {
        QubitParams::reduced()
    }

    fn prim(axis: PulseAxis, angle: f64) -> PrimitiveRotation<f64> {
        PrimitiveRotation::new(axis, angle).unwrap()
    }

    #[test]
    fn square_durations() {
        let p = reduced();
        let w = square_waveform(&prim(PulseAxis::XPrime, TAU - 1e-12), &p);
        assert!((w.duration() - TAU / 2f64.sqrt()).abs() < 1e-9);
        let w = square_waveform(&prim(PulseAxis::ZPrime, PI), &p);
        assert!((w.duration() - TAU / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(w.value_at(0.1), -1.0);
    }

    #[test]
    fn square_waveform_matches_rotation() {
        let p = reduced();
        let x = prim(PulseAxis::XPrime, PI / 3.0);
        let u = realized_unitary(&square_waveform(&x, &p), &p, default_dt(&p)).unwrap();
        let v = square_pulse_unitary(x.axis.bloch(), x.angle).unwrap();
        assert!(1.0 - process_fidelity(&u, &v).unwrap() < 1e-12);
    }

    #[test]
    fn degenerate_ramp_is_square() {
        let p = reduced();
        let x = prim(PulseAxis::XPrime, 1.3);
        let w = ramped_waveform(&x, &RiseSpec::square(), &CorrectionEntry::ideal(1.3), &p).unwrap();
        let s = square_waveform(&x, &p);
        assert!((w.duration() - s.duration()).abs() < 1e-15);
        assert_eq!(w.value_at(0.5), s.value_at(0.5));
    }

    #[test]
    fn ramped_shape() {
        let p = reduced();
        let tau = 0.05;
        let angle = 1.0;
        let entry = CorrectionEntry {
            tau,
            target_angle: angle,
            xi: 1.2,
            delta_t: 0.04,
            residual_error: 0.0,
            complement: false,
        };
        let x = prim(PulseAxis::ZPrime, angle);
        let w = ramped_waveform(&x, &RiseSpec::sine(tau).unwrap(), &entry, &p).unwrap();
        let expect = (square_duration_fraction(angle) + 0.04) * TAU;
        assert!((w.duration() - expect).abs() < 1e-12);
        assert!((w.max_abs() - 1.2).abs() < 1e-15);
        assert_eq!(w.value_at(0.0), 0.0);
        assert!(w.value_at(w.duration()).abs() < 1e-12);
        assert!(w.value_at(w.duration() / 2.0) < 0.0);

        let mut bad = entry;
        bad.target_angle = 0.9;
        assert!(ramped_waveform(&x, &RiseSpec::sine(tau).unwrap(), &bad, &p).is_err());
    }

    #[test]
    fn zero_flat_top_is_single_lobe() {
        let p = reduced();
        let tau: f64 = 0.03;
        let angle: f64 = 0.4;
        let entry = CorrectionEntry {
            tau,
            target_angle: angle,
            xi: 1.5,
            delta_t: CorrectionEntry::min_delta_t(tau, angle),
            residual_error: 0.0,
            complement: false,
        };
        let segs = entry.segments(PulseAxis::XPrime).unwrap();
        assert_eq!(segs.len(), 1);
        assert!(segs[0].flat_duration.abs() < 1e-15);
        let w = PulseTrain::new(segs).waveform(&p);
        assert_eq!(w.segments().len(), 2);
        let mid = w.duration() / 2.0;
        assert!((w.value_at(mid) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn partial_rise_conversion() {
        let r = RiseSpec::<f64>::from_partial_rise(0.01, 0.0, 1.0).unwrap();
        assert!((r.tau - 0.01).abs() < 1e-15);
        let r = RiseSpec::from_partial_rise(0.01, 0.2, 0.8).unwrap();
        assert!(r.tau > 0.01);
    }

    #[test]
    fn min_angle_edge_cases() {
        let p = reduced();
        assert_eq!(min_angle(0.0, &p).unwrap(), 0.0);
        let a = min_angle(0.02, &p).unwrap();
        let b = min_angle(0.04, &p).unwrap();
        assert!(b >= a);
    }

    #[test]
    fn reference_taus_hit_their_angles() {
        let p = reduced();
        for (tau, want) in REFERENCE_TAUS.iter().zip(REFERENCE_MIN_ANGLES) {
            let got = min_angle(*tau, &p).unwrap();
            assert!(
                (got - want).abs() / want < 1e-6,
                "tau {tau}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn subdivision_three_half_pi() {
        let p = reduced();
        let s = subdivide_x(1.5 * PI, REFERENCE_TAUS[0], &p).unwrap();
        assert_eq!(s.pieces, 4);
        assert!(!s.complement);
        let target = square_pulse_unitary(BlochVector::x(), 1.5 * PI).unwrap();
        assert!(1.0 - process_fidelity(&s.result().unitary(), &target).unwrap() < 1e-12);
        for w in s.primitives.windows(2) {
            assert_ne!(w[0].axis, w[1].axis);
        }
        assert!(s
            .primitives
            .iter()
            .all(|q| q.angle >= FRAC_PI_8 * (1.0 - 1e-6)));

        let small = subdivide_x(PI / 16.0, REFERENCE_TAUS[0], &p).unwrap();
        assert!(small.complement);
        assert_eq!(small.pieces, 1);
    }
}
