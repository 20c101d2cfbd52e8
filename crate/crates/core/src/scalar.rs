//! Scalar abstraction shared by the signal chain.
//!
//! Sample storage and the FFT/CFAR processing are generic over [`Real`], so a
//! cube can be carried as `f32` to halve memory or as `f64` for reference runs.
//! Phase accumulation inside the synthesizer always happens in `f64` (the
//! carrier term `f0 * t` needs the mantissa) and is narrowed on store.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Propagation speed used throughout the simulator, m/s.
///
/// The nominal `3e8` keeps the tabulated resolutions (0.24 / 0.16 / 0.12 m)
/// and delays (266.67 ns at 40 m) exact.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Floating point sample type: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + rustfft::FftNum + Default + Debug + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64_lossy(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Wavelength in meters for a carrier frequency in Hz.
pub fn wavelength(frequency: f64) -> f64 {
    SPEED_OF_LIGHT / frequency
}
