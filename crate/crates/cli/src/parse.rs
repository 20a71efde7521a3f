//! Parsers for rotation axes, angles and initial states.

use std::f64::consts::PI;

use dqd_qubit::decomposition::{
    decompose_axis, decompose_general_3, DecompositionResult, PulseAxis, RotationSpec, Scheme,
};
use dqd_qubit::two_level::{BlochVector, QubitState};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxisArg {
    Lab(BlochVector<f64>),
    Native(PulseAxis),
    General(BlochVector<f64>),
}

impl AxisArg {
    pub fn vector(&self) -> BlochVector<f64> {
        match *self {
            Self::Lab(v) | Self::General(v) => v,
            Self::Native(a) => a.bloch(),
        }
    }

    /// Pulse sequence for a rotation by `angle` about this axis.
    pub fn decompose(&self, angle: f64) -> Result<DecompositionResult<f64>> {
        let spec = RotationSpec::new(self.vector(), angle)?;
        Ok(match *self {
            Self::Native(a) => DecompositionResult::from_angles(Scheme::Single, &[(a, spec.angle)]),
            Self::Lab(_) => decompose_axis(&spec)?,
            Self::General(_) => decompose_general_3(&spec),
        })
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != n {
        return Err(usage(format!(
            "{what}: expected {n} comma-separated numbers, got {s:?}"
        )));
    }
    parts
        .iter()
        .map(|p| parse_angle(p).map_err(|_| usage(format!("{what}: bad number {p:?}"))))
        .collect()
}

pub fn parse_axis(s: &str) -> Result<AxisArg> {
    let t = s.trim().to_ascii_lowercase();
    let lab = |v| Ok(AxisArg::Lab(v));
    match t.as_str() {
        "x" | "+x" => lab(BlochVector::x()),
        "y" | "+y" => lab(BlochVector::y()),
        "z" | "+z" => lab(BlochVector::z()),
        "-x" => lab(BlochVector::x().neg()),
        "-y" => lab(BlochVector::y().neg()),
        "-z" => lab(BlochVector::z().neg()),
        "x'" | "xp" | "x-prime" => Ok(AxisArg::Native(PulseAxis::XPrime)),
        "z'" | "zp" | "z-prime" => Ok(AxisArg::Native(PulseAxis::ZPrime)),
        _ => {
            let v = numbers(&t, 3, "axis")?;
            let n = BlochVector::new(v[0], v[1], v[2])
                .normalize()
                .map_err(|e| usage(format!("axis: {e}")))?;
            Ok(AxisArg::General(n))
        }
    }
}

/// Radians; accepts plain numbers and multiples or fractions of `pi`
/// such as `pi`, `-pi/2`, `3pi/2`, `0.5*pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t: String = s
        .trim()
        .to_ascii_lowercase()
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let bad = || usage(format!("bad angle {s:?}"));
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let pos = num.find("pi").ok_or_else(bad)?;
    if pos + 2 != num.len() {
        return Err(bad());
    }
    let coef = match num[..pos].trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let v = coef * PI / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Named states, `theta,phi` angles, or `ground` for the bonding state of
/// the device (the −x pole).
pub fn parse_state(s: &str) -> Result<QubitState<f64>> {
    let t = s.trim().to_ascii_lowercase();
    let pole = |v: BlochVector<f64>| QubitState::along(v).map_err(CliError::from);
    match t.as_str() {
        "0" => Ok(QubitState::zero()),
        "1" => Ok(QubitState::one()),
        "+" | "+x" => pole(BlochVector::x()),
        "-" | "-x" | "ground" => pole(BlochVector::x().neg()),
        "+i" | "+y" => pole(BlochVector::y()),
        "-i" | "-y" => pole(BlochVector::y().neg()),
        _ => {
            let v = numbers(&t, 2, "initial state")?;
            Ok(QubitState::from_bloch_angles(v[0], v[1]))
        }
    }
}
