//! Roadside FMCW millimeter-wave radar simulation.
//!
//! The crate covers the full chain for one radar frame: intersection scene
//! geometry ([`scene`]), ray-traced target scattering ([`rcs`]), multi-channel
//! IF synthesis ([`waveform`]) and range/Doppler/CFAR/angle processing into
//! range-Doppler maps and point clouds ([`dsp`]).
//!
//! Sample storage and processing are generic over [`Real`] (`f32` or `f64`);
//! the aliases below fix the common choice.

pub mod diagnostics;
pub mod dsp;
pub mod error;
pub mod metrics;
pub mod rcs;
pub mod scalar;
pub mod scene;
pub mod waveform;

pub use diagnostics::Diagnostic;
pub use error::{Result, SimError};
pub use scalar::{Real, SPEED_OF_LIGHT};

pub type DataCube64 = waveform::DataCube<f64>;
pub type DataCube32 = waveform::DataCube<f32>;
pub type Rdm64 = dsp::Rdm<f64>;
pub type Rdm32 = dsp::Rdm<f32>;
pub type FrameProducts64 = dsp::FrameProducts<f64>;
pub type FrameProducts32 = dsp::FrameProducts<f32>;
/// Radar metrics in exact rational arithmetic.
pub type ExactMetrics = metrics::ChirpMetrics<num_rational::BigRational>;
pub type FloatMetrics = metrics::ChirpMetrics<f64>;
