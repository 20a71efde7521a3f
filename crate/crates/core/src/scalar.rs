use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the simulation kernels are written against.
///
/// Implemented for `f32` and `f64`. The tolerance hooks let validation code
/// scale its checks to the precision actually available.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Slack used when validating unit norms and unitarity of inputs.
    fn check_tol() -> Self;

    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Lossy conversion used for error reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn check_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    #[inline]
    fn check_tol() -> Self {
        1e-4
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let two_pi = T::TAU();
    let mut a = angle % two_pi;
    if a < T::zero() {
        a = a + two_pi;
    }
    if a >= two_pi {
        a = a - two_pi;
    }
    a
}

/// True when `angle` is within `tol` of a multiple of 2π.
pub fn is_full_turn<T: Real>(angle: T, tol: T) -> bool {
    let a = wrap_angle(angle);
    a <= tol || T::TAU() - a <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.0_f64), 0.0);
        assert!(
            (wrap_angle(-std::f64::consts::FRAC_PI_2) - 1.5 * std::f64::consts::PI).abs() < 1e-15
        );
        assert!(wrap_angle(std::f64::consts::TAU) < 1e-15);
        assert!((wrap_angle(7.0_f32) - (7.0 - std::f32::consts::TAU)).abs() < 1e-6);
    }

    #[test]
    fn full_turn_detection() {
        assert!(is_full_turn(std::f64::consts::TAU - 1e-14, 1e-12));
        assert!(is_full_turn(-1e-14_f64, 1e-12));
        assert!(!is_full_turn(0.1_f64, 1e-12));
    }
}
