//! Rewriting arbitrary rotations as sequences of x′/z′ square pulses.
//!
//! Primitive lists are stored in application order: the first element acts
//! on the state first, so the operator product is `P_n ··· P_2 P_1`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{is_full_turn, wrap_angle, Real};
use crate::two_level::{rotation_unchecked, BlochVector, QubitState, Unitary2};

/// The two natively available rotation axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PulseAxis {
    #[serde(rename = "XPRIME")]
    XPrime,
    #[serde(rename = "ZPRIME")]
    ZPrime,
}

impl PulseAxis {
    pub fn bloch<T: Real>(self) -> BlochVector<T> {
        match self {
            PulseAxis::XPrime => BlochVector::x_prime(),
            PulseAxis::ZPrime => BlochVector::z_prime(),
        }
    }

    /// Sign of the detuning that realizes this axis.
    pub fn detuning_sign<T: Real>(self) -> T {
        match self {
            PulseAxis::XPrime => T::one(),
            PulseAxis::ZPrime => -T::one(),
        }
    }

    pub fn other(self) -> Self {
        match self {
            PulseAxis::XPrime => PulseAxis::ZPrime,
            PulseAxis::ZPrime => PulseAxis::XPrime,
        }
    }
}

/// Positive-angle rotation about x′ or z′.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveRotation<T> {
    pub axis: PulseAxis,
    pub angle: T,
}

impl<T: Real> PrimitiveRotation<T> {
    /// Wraps `angle` into `[0, 2π)`; returns `None` for a null rotation.
    pub fn new(axis: PulseAxis, angle: T) -> Option<Self> {
        let angle = wrap_angle(angle);
        if is_full_turn(angle, zero_tol()) {
            None
        } else {
            Some(Self { axis, angle })
        }
    }

    pub fn unitary(&self) -> Unitary2<T> {
        rotation_unchecked(self.axis.bloch(), self.angle)
    }
}

fn zero_tol<T: Real>() -> T {
    T::epsilon() * T::lit(64.0)
}

/// Target rotation: unit axis and angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationSpec<T> {
    pub axis: BlochVector<T>,
    pub angle: T,
}

impl<T: Real> RotationSpec<T> {
    pub fn new(axis: BlochVector<T>, angle: T) -> Result<Self> {
        let axis = axis.unit()?;
        if !angle.is_finite() {
            return Err(domain("rotation angle must be finite"));
        }
        Ok(Self {
            axis,
            angle: wrap_angle(angle),
        })
    }

    pub fn unitary(&self) -> Unitary2<T> {
        rotation_unchecked(self.axis, self.angle)
    }
}

/// Which construction produced a primitive list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    FivePulse,
    ThreePulseY,
    ThreePulseXz,
    ThreePulseEuler,
    Single,
    Prep,
    Subdivided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionResult<T> {
    pub primitives: Vec<PrimitiveRotation<T>>,
    pub scheme: Scheme,
}

impl<T: Real> DecompositionResult<T> {
    /// Collects primitives in application order, fusing neighbours about the
    /// same axis and dropping null rotations.
    pub fn from_angles(scheme: Scheme, parts: &[(PulseAxis, T)]) -> Self {
        let mut primitives: Vec<PrimitiveRotation<T>> = Vec::with_capacity(parts.len());
        for &(axis, angle) in parts {
            let angle = match primitives.last() {
                Some(top) if top.axis == axis => {
                    let merged = top.angle + angle;
                    primitives.pop();
                    merged
                }
                _ => angle,
            };
            primitives.extend(PrimitiveRotation::new(axis, angle));
        }
        Self { primitives, scheme }
    }

    /// Operator product of the primitives.
    pub fn unitary(&self) -> Unitary2<T> {
        self.primitives
            .iter()
            .fold(Unitary2::identity(), |u, p| p.unitary() * u)
    }

    pub fn total_angle(&self) -> T {
        self.primitives
            .iter()
            .fold(T::zero(), |acc, p| acc + p.angle)
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// `[{"axis":"XPRIME","angle":...}, ...]` with round-trip exact angles.
    pub fn to_json(&self) -> String {
        let items: Vec<PrimitiveRotation<f64>> = self
            .primitives
            .iter()
            .map(|p| PrimitiveRotation {
                axis: p.axis,
                angle: p.angle.as_f64(),
            })
            .collect();
        serde_json::to_string(&items).expect("plain data serializes")
    }
}

/// Components of `n` in the right-handed frame (x′, y, z′).
fn frame_coords<T: Real>(n: &BlochVector<T>) -> (T, T, T) {
    (
        n.dot(&BlochVector::x_prime()),
        n.dot(&BlochVector::y()),
        n.dot(&BlochVector::z_prime()),
    )
}

/// Five-pulse construction `R_x′(a) R_z′(b) R_x′(α) R_z′(-b) R_x′(-a)`.
///
/// `R_x′(a) R_z′(b)` carries x′ onto the target axis. Both angles come from
/// the Bloch angles `(θ, φ)` of the axis after a π/4 turn about y, which sends
/// x′ to the south pole: `a = π/2 - φ`, `b = π - θ`.
pub fn decompose_general_5<T: Real>(spec: &RotationSpec<T>) -> DecompositionResult<T> {
    let n = spec.axis;
    let (s, co) = T::FRAC_PI_4().sin_cos();
    let turned = BlochVector::new(co * n.nx + s * n.nz, n.ny, -s * n.nx + co * n.nz);
    let theta = turned.nz.max(-T::one()).min(T::one()).acos();
    let phi = if turned.nx.hypot(turned.ny) <= zero_tol() {
        T::FRAC_PI_2()
    } else {
        turned.ny.atan2(turned.nx)
    };
    let a = T::FRAC_PI_2() - phi;
    let b = T::PI() - theta;
    DecompositionResult::from_angles(
        Scheme::FivePulse,
        &[
            (PulseAxis::XPrime, -a),
            (PulseAxis::ZPrime, -b),
            (PulseAxis::XPrime, spec.angle),
            (PulseAxis::ZPrime, b),
            (PulseAxis::XPrime, a),
        ],
    )
}

/// Rotation about y in three pulses.
///
/// Nonnegative angles use `R_z′(π/2) R_x′(α) R_z′(3π/2)`; negative ones use
/// the mirrored `R_x′(π/2) R_z′(|α|) R_x′(3π/2)`.
pub fn decompose_y<T: Real>(angle: T) -> DecompositionResult<T> {
    let half = T::FRAC_PI_2();
    let three_half = T::lit(3.0) * half;
    let mag = wrap_angle(angle.abs());
    if is_full_turn(mag, zero_tol()) {
        return DecompositionResult {
            primitives: Vec::new(),
            scheme: Scheme::ThreePulseY,
        };
    }
    let (outer, inner) = if angle >= T::zero() {
        (PulseAxis::ZPrime, PulseAxis::XPrime)
    } else {
        (PulseAxis::XPrime, PulseAxis::ZPrime)
    };
    DecompositionResult::from_angles(
        Scheme::ThreePulseY,
        &[(outer, three_half), (inner, mag), (outer, half)],
    )
}

/// Lab axis handled by the closed-form three-pulse scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XzAxis {
    X,
    Z,
}

/// Angles `(Θ1, Θ2)` with `R_x′(Θ1) R_z′(Θ2) R_x′(Θ1) = R_axis(α)` up to phase.
///
/// For x: `Θ1 = arccos(√2 c / √(c² + 1))` with `c = cos(α/2)` and
/// `Θ2 = 2 atan(sin Θ1)`. For z the outer angle is the complement `π - Θ1`
/// and `Θ2 = 2π - 2 atan(sin Θ1)`.
pub fn theta_angles_xz<T: Real>(alpha: T, axis: XzAxis) -> (T, T) {
    let two = T::lit(2.0);
    let ch = (alpha / two).cos();
    let arg = (T::SQRT_2() * ch / (ch * ch + T::one()).sqrt())
        .max(-T::one())
        .min(T::one());
    let theta1 = arg.acos();
    let inner = two * theta1.sin().atan();
    match axis {
        XzAxis::X => (theta1, inner),
        XzAxis::Z => (T::PI() - theta1, T::TAU() - inner),
    }
}

fn axis_match<T: Real>(a: &BlochVector<T>, b: &BlochVector<T>) -> Option<bool> {
    let tol = T::check_tol();
    let d = a.dot(b);
    if (d - T::one()).abs() <= tol {
        Some(true)
    } else if (d + T::one()).abs() <= tol {
        Some(false)
    } else {
        None
    }
}

/// Three-pulse rotation about a lab axis (±x̂, ±ŷ, ±ẑ).
///
/// For z two orderings are available: x′-outer with the z angles, or the
/// z′-outer mirror image carrying the x′-outer angles of `2π - α` (σx maps
/// x′ ↔ z′ and ẑ → -ẑ). The one with the smaller angle sum is emitted.
pub fn decompose_axis<T: Real>(spec: &RotationSpec<T>) -> Result<DecompositionResult<T>> {
    let n = spec.axis;
    let signed = |positive: bool| if positive { spec.angle } else { -spec.angle };
    if let Some(pos) = axis_match(&n, &BlochVector::y()) {
        let mut r = decompose_y(signed(pos));
        r.scheme = Scheme::ThreePulseXz;
        return Ok(r);
    }
    let (lab, pos) = if let Some(pos) = axis_match(&n, &BlochVector::x()) {
        (XzAxis::X, pos)
    } else if let Some(pos) = axis_match(&n, &BlochVector::z()) {
        (XzAxis::Z, pos)
    } else {
        return Err(domain("decompose_axis needs a lab axis x, y or z"));
    };
    let alpha = wrap_angle(signed(pos));
    if is_full_turn(alpha, zero_tol()) {
        return Ok(DecompositionResult {
            primitives: Vec::new(),
            scheme: Scheme::ThreePulseXz,
        });
    }
    let (t1, t2) = theta_angles_xz(alpha, lab);
    let direct = DecompositionResult::from_angles(
        Scheme::ThreePulseXz,
        &[
            (PulseAxis::XPrime, t1),
            (PulseAxis::ZPrime, t2),
            (PulseAxis::XPrime, t1),
        ],
    );
    if lab == XzAxis::X {
        return Ok(direct);
    }
    let (m1, m2) = theta_angles_xz(T::TAU() - alpha, XzAxis::Z);
    let mirrored = DecompositionResult::from_angles(
        Scheme::ThreePulseXz,
        &[
            (PulseAxis::ZPrime, m1),
            (PulseAxis::XPrime, m2),
            (PulseAxis::ZPrime, m1),
        ],
    );
    if mirrored.total_angle() < direct.total_angle() {
        Ok(mirrored)
    } else {
        Ok(direct)
    }
}

/// Euler factorization `R_x′(a) R_z′(b) R_x′(c)` for any axis.
///
/// Working in the (x′, y, z′) frame and swapping the roles of its first and
/// last axes turns the problem into a standard ZXZ extraction. Phase
/// differences fix `a ± c` only modulo 2π, so the sign of `b` is settled by
/// checking both against the target. Of the two equivalent angle triples the
/// one with the smaller positive sum is kept.
pub fn decompose_general_3<T: Real>(spec: &RotationSpec<T>) -> DecompositionResult<T> {
    let (n1, n2, n3) = frame_coords(&spec.axis);
    let m = BlochVector::new(n3, -n2, n1);
    let v = rotation_unchecked(m, spec.angle);
    let tol = zero_tol::<T>() * T::lit(16.0);
    let b = T::lit(2.0) * v.u10.norm().atan2(v.u00.norm());
    let (a, cc) = if v.u10.norm() <= tol {
        (v.u11.arg() - v.u00.arg(), T::zero())
    } else if v.u00.norm() <= tol {
        (v.u10.arg() - v.u01.arg(), T::zero())
    } else {
        let sum = v.u11.arg() - v.u00.arg();
        let diff = v.u10.arg() - v.u01.arg();
        ((sum + diff) / T::lit(2.0), (sum - diff) / T::lit(2.0))
    };
    let build = |a: T, b: T, cc: T| {
        DecompositionResult::from_angles(
            Scheme::ThreePulseEuler,
            &[
                (PulseAxis::XPrime, cc),
                (PulseAxis::ZPrime, b),
                (PulseAxis::XPrime, a),
            ],
        )
    };
    let target = spec.unitary();
    let overlap = |r: &DecompositionResult<T>| (r.unitary().dagger() * target).trace().norm();
    let plus = build(a, b, cc);
    let minus = build(a, -b, cc);
    let b = if overlap(&minus) > overlap(&plus) {
        -b
    } else {
        b
    };
    let pi = T::PI();
    let first = build(a, b, cc);
    let second = build(a + pi, -b, cc + pi);
    if second.total_angle() < first.total_angle() {
        second
    } else {
        first
    }
}

/// Target of a one-pulse state preparation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrepTarget {
    Zero,
    One,
}

impl PrepTarget {
    pub fn state<T: Real>(self) -> QubitState<T> {
        match self {
            PrepTarget::Zero => QubitState::zero(),
            PrepTarget::One => QubitState::one(),
        }
    }
}

/// Single π pulse from `(|0⟩ + |1⟩)/√2`: z′ reaches |0⟩, x′ reaches |1⟩.
pub fn prepare_state<T: Real>(target: PrepTarget) -> DecompositionResult<T> {
    let axis = match target {
        PrepTarget::Zero => PulseAxis::ZPrime,
        PrepTarget::One => PulseAxis::XPrime,
    };
    DecompositionResult::from_angles(Scheme::Prep, &[(axis, T::PI())])
}

/// Preparation of `target` from an arbitrary `initial` state.
///
/// Uses a single x′ or z′ π pulse when one suffices, otherwise the shortest
/// great-circle rotation through the three-pulse Euler route.
pub fn prepare_from<T: Real>(
    initial: &QubitState<T>,
    target: PrepTarget,
) -> Result<DecompositionResult<T>> {
    let goal = target.state::<T>();
    let close = |u: &Unitary2<T>| {
        let f = goal.inner(&u.apply(initial)).norm_sqr();
        T::one() - f <= T::check_tol()
    };
    for axis in [PulseAxis::XPrime, PulseAxis::ZPrime] {
        let r = DecompositionResult::from_angles(Scheme::Prep, &[(axis, T::PI())]);
        if close(&r.unitary()) {
            return Ok(r);
        }
    }
    let from = initial.bloch_vector();
    let to = goal.bloch_vector();
    let axis = from.cross(&to);
    let angle = from.dot(&to).max(-T::one()).min(T::one()).acos();
    let axis = if axis.norm() > T::check_tol() {
        axis.normalize()?
    } else if angle < T::FRAC_PI_2() {
        return Ok(DecompositionResult {
            primitives: Vec::new(),
            scheme: Scheme::Prep,
        });
    } else {
        // antipodal: any axis perpendicular to `from` will do
        let trial = from.cross(&BlochVector::y());
        if trial.norm() > T::lit(0.1) {
            trial.normalize()?
        } else {
            from.cross(&BlochVector::x()).normalize()?
        }
    };
    let mut r = decompose_general_3(&RotationSpec::new(axis, angle)?);
    r.scheme = Scheme::Prep;
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate<T> {
    X,
    Y,
    Z,
    H,
    Phase(T),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateBasis {
    /// Computational basis of the lab frame.
    Standard,
    /// Gates expressed with z′ as the bit-flip axis and x′ as the phase axis.
    Rotated,
}

impl<T: Real> Gate<T> {
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "x" => Ok(Gate::X),
            "y" => Ok(Gate::Y),
            "z" => Ok(Gate::Z),
            "h" => Ok(Gate::H),
            _ => {
                let inner = lower
                    .strip_prefix("phase(")
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| domain(format!("unknown gate {name:?}")))?;
                let phi: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| domain(format!("bad phase angle in {name:?}")))?;
                Ok(Gate::Phase(T::lit(phi)))
            }
        }
    }

    /// The ideal operator in the given basis, up to phase.
    pub fn target(&self, basis: GateBasis) -> Unitary2<T> {
        let pi = T::PI();
        let h = T::FRAC_1_SQRT_2();
        let (x, y, z) = match basis {
            GateBasis::Standard => (BlochVector::x(), BlochVector::y(), BlochVector::z()),
            GateBasis::Rotated => (
                BlochVector::z_prime(),
                BlochVector::y().neg(),
                BlochVector::x_prime(),
            ),
        };
        match self {
            Gate::X => rotation_unchecked(x, pi),
            Gate::Y => rotation_unchecked(y, pi),
            Gate::Z => rotation_unchecked(z, pi),
            Gate::H => rotation_unchecked(
                BlochVector::new((x.nx + z.nx) * h, (x.ny + z.ny) * h, (x.nz + z.nz) * h),
                pi,
            ),
            Gate::Phase(phi) => rotation_unchecked(z, *phi),
        }
    }
}

/// Pulse sequence for a named gate.
///
/// In the rotated basis (z′, -y, x′) plays the role of (x, y, z), which keeps
/// the frame right-handed; the Hadamard is the phase flip followed by a
/// quarter turn about that frame's y axis, i.e. `R_y(-π/2)` in the lab.
pub fn gate<T: Real>(name: Gate<T>, basis: GateBasis) -> Result<DecompositionResult<T>> {
    let pi = T::PI();
    match basis {
        GateBasis::Rotated => Ok(match name {
            Gate::X => DecompositionResult::from_angles(Scheme::Single, &[(PulseAxis::ZPrime, pi)]),
            Gate::Z => DecompositionResult::from_angles(Scheme::Single, &[(PulseAxis::XPrime, pi)]),
            Gate::Phase(phi) => {
                DecompositionResult::from_angles(Scheme::Single, &[(PulseAxis::XPrime, phi)])
            }
            Gate::Y => decompose_y(pi),
            Gate::H => {
                let mut prims = vec![PrimitiveRotation {
                    axis: PulseAxis::XPrime,
                    angle: pi,
                }];
                prims.extend(decompose_y(-T::FRAC_PI_2()).primitives);
                DecompositionResult {
                    primitives: prims,
                    scheme: Scheme::ThreePulseY,
                }
            }
        }),
        GateBasis::Standard => match name {
            Gate::X => decompose_axis(&RotationSpec::new(BlochVector::x(), pi)?),
            Gate::Y => Ok(decompose_y(pi)),
            Gate::Z => decompose_axis(&RotationSpec::new(BlochVector::z(), pi)?),
            Gate::Phase(phi) => decompose_axis(&RotationSpec::new(BlochVector::z(), phi)?),
            Gate::H => {
                let axis = BlochVector::new(T::one(), T::zero(), T::one()).normalize()?;
                Ok(decompose_general_3(&RotationSpec::new(axis, pi)?))
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_level::{process_fidelity, square_pulse_unitary};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn matches(r: &DecompositionResult<f64>, target: &Unitary2<f64>) -> f64 {
        1.0 - process_fidelity(&r.unitary(), target).unwrap()
    }

    #[test]
    fn five_pulse_aligned_axis_collapses() {
        let spec = RotationSpec::<f64>::new(BlochVector::x_prime(), 1.1).unwrap();
        let r = decompose_general_5(&spec);
        assert_eq!(r.primitives.len(), 1);
        assert_eq!(r.primitives[0].axis, PulseAxis::XPrime);
        assert!((r.primitives[0].angle - 1.1).abs() < 1e-15);
    }

    #[test]
    fn five_pulse_about_y_is_three_pulse() {
        let spec = RotationSpec::new(BlochVector::y(), 0.9).unwrap();
        let r = decompose_general_5(&spec);
        assert_eq!(r.primitives.len(), 3);
        assert!(matches(&r, &spec.unitary()) < 1e-14);
        let y = decompose_y(0.9);
        for (a, b) in r.primitives.iter().zip(&y.primitives) {
            assert_eq!(a.axis, b.axis);
            assert!((a.angle - b.angle).abs() < 1e-12);
        }
    }

    #[test]
    fn y_rotation_examples() {
        let r = decompose_y(PI);
        let angles: Vec<_> = r.primitives.iter().map(|p| (p.axis, p.angle)).collect();
        assert_eq!(
            angles,
            vec![
                (PulseAxis::ZPrime, 1.5 * PI),
                (PulseAxis::XPrime, PI),
                (PulseAxis::ZPrime, FRAC_PI_2)
            ]
        );
        let y = square_pulse_unitary(BlochVector::y(), PI).unwrap();
        assert!(matches(&r, &y) < 1e-14);
        assert!(decompose_y(0.0).primitives.is_empty());

        let neg = decompose_y(-FRAC_PI_2);
        assert_eq!(neg.primitives[0].axis, PulseAxis::XPrime);
        let target = square_pulse_unitary(BlochVector::y(), -FRAC_PI_2).unwrap();
        assert!(matches(&neg, &target) < 1e-14);
    }

    #[test]
    fn theta_closed_form_values() {
        assert_eq!(theta_angles_xz(0.0, XzAxis::X), (0.0, 0.0));
        let (a, b) = theta_angles_xz(PI, XzAxis::X);
        assert!((a - FRAC_PI_2).abs() < 1e-15 && (b - FRAC_PI_2).abs() < 1e-15);
        let (a, b) = theta_angles_xz(PI, XzAxis::Z);
        assert!((a - FRAC_PI_2).abs() < 1e-15 && (b - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn theta_two_thirds_pi() {
        let (a, b) = theta_angles_xz(2.0 * PI / 3.0, XzAxis::X);
        let r = DecompositionResult::from_angles(
            Scheme::ThreePulseXz,
            &[
                (PulseAxis::XPrime, a),
                (PulseAxis::ZPrime, b),
                (PulseAxis::XPrime, a),
            ],
        );
        let x = square_pulse_unitary(BlochVector::x(), 2.0 * PI / 3.0).unwrap();
        assert!(matches(&r, &x) < 1e-14);
    }

    #[test]
    fn axis_examples() {
        let x = decompose_axis(&RotationSpec::new(BlochVector::x(), PI).unwrap()).unwrap();
        let expect = [
            (PulseAxis::XPrime, FRAC_PI_2),
            (PulseAxis::ZPrime, FRAC_PI_2),
            (PulseAxis::XPrime, FRAC_PI_2),
        ];
        for (p, (ax, ang)) in x.primitives.iter().zip(expect) {
            assert_eq!(p.axis, ax);
            assert!((p.angle - ang).abs() < 1e-15);
        }

        let zspec = RotationSpec::new(BlochVector::z(), PI).unwrap();
        let z = decompose_axis(&zspec).unwrap();
        let zgate = gate::<f64>(Gate::Z, GateBasis::Rotated).unwrap();
        assert!(matches(&z, &square_pulse_unitary(BlochVector::z(), PI).unwrap()) < 1e-14);
        assert!(
            matches(
                &zgate,
                &square_pulse_unitary(BlochVector::x_prime(), PI).unwrap()
            ) < 1e-14
        );

        assert!(decompose_axis(&RotationSpec::new(BlochVector::x_prime(), 1.0).unwrap()).is_err());
    }

    #[test]
    fn z_shortcut_beats_uncomplemented_angles() {
        let alpha = 1.5 * PI;
        let spec = RotationSpec::new(BlochVector::z(), alpha).unwrap();
        let r = decompose_axis(&spec).unwrap();
        assert!(matches(&r, &spec.unitary()) < 1e-14);
        // literal closed form evaluated at α itself, without the complement
        let c = (alpha / 2.0).cos();
        let t1 = (2f64.sqrt() * c / (c * c + 1.0).sqrt()).acos();
        let literal = 2.0 * t1 + 2.0 * (PI - t1.sin().atan());
        assert!(r.total_angle() < literal - 1e-6);
    }

    #[test]
    fn euler_examples() {
        let r =
            decompose_general_3(&RotationSpec::<f64>::new(BlochVector::x_prime(), 0.8).unwrap());
        assert_eq!(r.primitives.len(), 1);
        assert!((r.primitives[0].angle - 0.8).abs() < 1e-12);

        let spec = RotationSpec::new(BlochVector::y(), PI).unwrap();
        let r = decompose_general_3(&spec);
        assert!(matches(&r, &spec.unitary()) < 1e-14);
        assert!(r.total_angle() <= decompose_y(PI).total_angle() + 1e-12);
    }

    #[test]
    fn preparation() {
        let plus = QubitState::normalized(
            num_complex::Complex::new(1.0, 0.0),
            num_complex::Complex::new(1.0, 0.0),
        )
        .unwrap();
        for (target, axis) in [
            (PrepTarget::Zero, PulseAxis::ZPrime),
            (PrepTarget::One, PulseAxis::XPrime),
        ] {
            let r = prepare_state::<f64>(target);
            assert_eq!(r.primitives.len(), 1);
            assert_eq!(r.primitives[0].axis, axis);
            let out = r.unitary().apply(&plus);
            assert!(1.0 - target.state::<f64>().inner(&out).norm_sqr() < 1e-14);
        }
        let twice = prepare_state::<f64>(PrepTarget::Zero).unitary()
            * prepare_state::<f64>(PrepTarget::Zero).unitary();
        let back = twice.apply(&plus);
        assert!(1.0 - plus.inner(&back).norm_sqr() < 1e-14);

        let minus = QubitState::normalized(
            num_complex::Complex::new(1.0, 0.0),
            num_complex::Complex::new(-1.0, 0.0),
        )
        .unwrap();
        let r = prepare_from(&minus, PrepTarget::Zero).unwrap();
        assert_eq!(r.primitives.len(), 1);
        assert_eq!(r.primitives[0].axis, PulseAxis::XPrime);
        let odd = QubitState::from_bloch_angles(1.0, 2.0);
        let r = prepare_from(&odd, PrepTarget::One).unwrap();
        let out = r.unitary().apply(&odd);
        assert!(1.0 - QubitState::one().inner(&out).norm_sqr() < 1e-12);
    }

    #[test]
    fn rotated_gates() {
        let x = gate::<f64>(Gate::X, GateBasis::Rotated).unwrap();
        assert_eq!(x.primitives.len(), 1);
        assert_eq!(x.primitives[0].axis, PulseAxis::ZPrime);
        let h = gate::<f64>(Gate::H, GateBasis::Rotated).unwrap();
        assert!(matches(&h, &Gate::H.target(GateBasis::Rotated)) < 1e-14);
        assert!(matches(&h, &square_pulse_unitary(BlochVector::x(), PI).unwrap()) < 1e-14);
        assert!(gate::<f64>(Gate::Phase(0.0), GateBasis::Rotated)
            .unwrap()
            .is_empty());
        for g in [Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::Phase(0.7)] {
            for b in [GateBasis::Standard, GateBasis::Rotated] {
                let r = gate(g, b).unwrap();
                assert!(matches(&r, &g.target(b)) < 1e-13, "{g:?} {b:?}");
            }
        }
        assert!(Gate::<f64>::parse("cnot").is_err());
        assert_eq!(Gate::<f64>::parse("phase(0.5)").unwrap(), Gate::Phase(0.5));
    }

    #[test]
    fn json_shape() {
        let r = decompose_y(PI);
        let text = r.to_json();
        assert!(
            text.starts_with(r#"[{"axis":"ZPRIME","angle":4.71238898038469}"#),
            "{text}"
        );
        let back: Vec<PrimitiveRotation<f64>> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r.primitives);
    }

    #[test]
    fn zero_angle_everywhere_is_empty() {
        let spec =
            RotationSpec::new(BlochVector::new(0.2, 0.3, 0.9).normalize().unwrap(), TAU).unwrap();
        assert!(decompose_general_5(&spec).is_empty());
        assert!(decompose_general_3(&spec).is_empty());
    }
}
