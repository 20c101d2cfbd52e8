use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::metrics::ChirpMetrics;
use crate::scalar::{wavelength, SPEED_OF_LIGHT};
use crate::scene::Vec3;

/// One linear FMCW chirp as sampled by the ADC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChirpConfig {
    /// Chirp start frequency, Hz.
    pub start_frequency: f64,
    /// Frequency slope, Hz/s.
    pub slope: f64,
    /// Complex ADC rate, samples/s.
    pub sample_rate: f64,
    pub samples_per_chirp: usize,
    /// Dead time between the end of sampling and the next chirp, s.
    pub idle_time: f64,
    /// Transmit phase at t = 0, rad.
    pub initial_phase: f64,
}

impl Default for ChirpConfig {
    fn default() -> Self {
        Self {
            start_frequency: 77.0e9,
            slope: 12.5e12,
            sample_rate: 5.12e6,
            samples_per_chirp: 256,
            idle_time: 10.0e-6,
            initial_phase: 0.0,
        }
    }
}

impl ChirpConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("start_frequency", self.start_frequency),
            ("slope", self.slope),
            ("sample_rate", self.sample_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.samples_per_chirp < 2 {
            return Err(SimError::InvalidParameter("samples_per_chirp must be at least 2".into()));
        }
        if !(self.idle_time >= 0.0) {
            return Err(SimError::InvalidParameter("idle_time must be non-negative".into()));
        }
        if !self.initial_phase.is_finite() {
            return Err(SimError::InvalidParameter("initial_phase must be finite".into()));
        }
        Ok(())
    }

    pub fn sampling_time(&self) -> f64 {
        self.samples_per_chirp as f64 / self.sample_rate
    }

    /// Swept bandwidth over the sampled part of the chirp, Hz.
    pub fn bandwidth(&self) -> f64 {
        self.slope * self.sampling_time()
    }

    /// Chirp repetition period, s.
    pub fn chirp_period(&self) -> f64 {
        self.sampling_time() + self.idle_time
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.start_frequency)
    }

    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth())
    }

    /// Largest range whose beat frequency still fits in the complex IF band.
    pub fn max_range(&self) -> f64 {
        SPEED_OF_LIGHT * self.sample_rate / (2.0 * self.slope)
    }

    /// Largest round-trip delay inside the IF band, s.
    pub fn max_delay(&self) -> f64 {
        self.sample_rate / self.slope
    }

    /// Maximum unambiguous radial speed `lambda / (4 Tc)`, m/s.
    pub fn max_speed(&self) -> f64 {
        self.wavelength() / (4.0 * self.chirp_period())
    }

    pub fn beat_frequency(&self, range: f64) -> f64 {
        2.0 * self.slope * range / SPEED_OF_LIGHT
    }

    pub fn sample_time(&self, k: usize) -> f64 {
        k as f64 / self.sample_rate
    }

    pub fn metrics(&self) -> ChirpMetrics<f64> {
        ChirpMetrics::from_f64(self.slope, self.sample_rate, self.samples_per_chirp, self.idle_time)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub chirps_per_frame: usize,
    pub frames: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self { chirps_per_frame: 128, frames: 1 }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chirps_per_frame < 2 {
            return Err(SimError::InvalidParameter("chirps_per_frame must be at least 2".into()));
        }
        if self.frames < 1 {
            return Err(SimError::InvalidParameter("frames must be at least 1".into()));
        }
        Ok(())
    }
}

/// Uniform linear MIMO array along the radar's horizontal axis.
///
/// Receivers sit at `q * rx_spacing`; transmitters at `p * rx_count *
/// rx_spacing`, so the virtual array is a filled line of `tx_count *
/// rx_count` elements at `rx_spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub tx_count: usize,
    pub rx_count: usize,
    /// Receiver pitch, m; half a wavelength at the start frequency when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_spacing: Option<f64>,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { tx_count: 1, rx_count: 4, rx_spacing: None }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tx_count < 1 || self.rx_count < 1 {
            return Err(SimError::InvalidParameter("array needs at least one TX and one RX".into()));
        }
        if self.rx_spacing.is_some_and(|d| !(d > 0.0)) {
            return Err(SimError::InvalidParameter("rx_spacing must be positive".into()));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.tx_count * self.rx_count
    }

    pub fn spacing(&self, chirp: &ChirpConfig) -> f64 {
        self.rx_spacing.unwrap_or(chirp.wavelength() / 2.0)
    }

    /// Virtual element offsets along the array axis, m, in channel order
    /// (transmitter-major).
    pub fn virtual_positions(&self, chirp: &ChirpConfig) -> Vec<f64> {
        let d = self.spacing(chirp);
        (0..self.tx_count)
            .flat_map(|p| (0..self.rx_count).map(move |q| (p * self.rx_count + q) as f64 * d))
            .collect()
    }
}

/// Radar-equation constants and the additive noise level.
///
/// Power and gains are nominal values; the processing chain only depends on
/// relative levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBudget {
    /// Transmit power, W.
    pub tx_power: f64,
    /// Linear antenna gains.
    pub tx_gain: f64,
    pub rx_gain: f64,
    /// Signal-to-noise ratio of the strongest channel; `inf` disables noise.
    pub snr_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self { tx_power: 1.0, tx_gain: 10.0, rx_gain: 10.0, snr_db: 20.0 }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tx_power", self.tx_power), ("tx_gain", self.tx_gain), ("rx_gain", self.rx_gain)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(SimError::InvalidParameter("snr_db must be a number or +inf".into()));
        }
        Ok(())
    }
}

/// Ray tracing and center extraction settings for vehicle targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RcsSettings {
    pub max_bounce: usize,
    /// Ray tubes per wavelength along each launch-plane axis.
    pub rays_per_wavelength: f64,
    pub frequency_samples: usize,
    pub max_centers: usize,
    /// Look-angle change that forces a new trace, degrees.
    pub retrace_threshold_deg: f64,
}

impl Default for RcsSettings {
    fn default() -> Self {
        Self {
            max_bounce: 3,
            rays_per_wavelength: 0.5,
            frequency_samples: crate::rcs::DEFAULT_FREQUENCY_SAMPLES,
            max_centers: 64,
            retrace_threshold_deg: 0.5,
        }
    }
}

impl RcsSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_bounce < 1 {
            return Err(SimError::InvalidParameter("max_bounce must be at least 1".into()));
        }
        if !(self.rays_per_wavelength > 0.0) {
            return Err(SimError::InvalidParameter("rays_per_wavelength must be positive".into()));
        }
        if self.frequency_samples < 8 {
            return Err(SimError::InvalidParameter("frequency_samples must be at least 8".into()));
        }
        if !(self.retrace_threshold_deg >= 0.0) {
            return Err(SimError::InvalidParameter("retrace_threshold_deg must be non-negative".into()));
        }
        Ok(())
    }
}

/// Everything the synthesizer needs to know about the sensor.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarConfig {
    #[serde(default)]
    pub chirp: ChirpConfig,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub link: LinkBudget,
    #[serde(default)]
    pub rcs: RcsSettings,
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        self.chirp.validate()?;
        self.frame.validate()?;
        self.array.validate()?;
        self.link.validate()?;
        self.rcs.validate()
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame.chirps_per_frame as f64 * self.chirp.chirp_period()
    }
}

/// Unit vector of the array axis: horizontal and perpendicular to boresight.
pub fn array_axis(boresight: &Vec3) -> Vec3 {
    let a = boresight.cross(&Vec3::z());
    if a.norm() < 1e-12 {
        Vec3::x()
    } else {
        a.normalize()
    }
}
