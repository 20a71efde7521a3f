//! Pulse-level simulation and calibration of a double-quantum-dot charge qubit.
//!
//! The numerical kernels are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the double-precision types used by the calibration,
//! noise and CLI layers.

pub mod calibration;
pub mod decomposition;
pub mod error;
pub mod noise;
pub mod pulse;
pub mod readout;
pub mod scalar;
pub mod tdse;
pub mod two_level;

pub use error::{Error, Result};
pub use scalar::Real;

pub type QubitState = two_level::QubitState<f64>;
pub type BlochVector = two_level::BlochVector<f64>;
pub type QubitParams = two_level::QubitParams<f64>;
pub type Unitary2 = two_level::Unitary2<f64>;
pub type DetuningWaveform = two_level::DetuningWaveform<f64>;
pub type RotationSpec = decomposition::RotationSpec<f64>;
pub type PrimitiveRotation = decomposition::PrimitiveRotation<f64>;
pub type DecompositionResult = decomposition::DecompositionResult<f64>;
pub type CorrectionEntry = pulse::CorrectionEntry<f64>;
