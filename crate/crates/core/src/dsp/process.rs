use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::dsp::{
    angle_fft, cfar_2d, cluster_hits, cone_to_azimuth, doppler_fft, form_rdm, range_fft, significant_cells,
    to_point_cloud, BinMapping, CfarParams, Cluster, Detection, PointCloud, Rdm, Window,
};
use crate::error::{Result, SimError};
use crate::scalar::Real;
use crate::scene::RadarPose;
use crate::waveform::{DataCube, RadarConfig};

/// Processing-chain settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DspParams {
    pub range_window: Window,
    pub doppler_window: Window,
    pub cfar: CfarParams,
    pub angle_fft_size: usize,
    /// Cluster members further than this below their peak are not reported, dB.
    pub cluster_floor_db: f64,
}

impl Default for DspParams {
    fn default() -> Self {
        Self {
            range_window: Window::Hann,
            doppler_window: Window::Hann,
            cfar: CfarParams::default(),
            angle_fft_size: 64,
            cluster_floor_db: 6.0,
        }
    }
}

impl DspParams {
    pub fn validate(&self) -> Result<()> {
        self.cfar.validate()?;
        if self.angle_fft_size < 2 {
            return Err(SimError::InvalidParameter("angle_fft_size must be at least 2".into()));
        }
        if !(self.cluster_floor_db >= 0.0) {
            return Err(SimError::InvalidParameter("cluster_floor_db must be non-negative".into()));
        }
        Ok(())
    }
}

/// Everything the chain derives from one cube.
#[derive(Debug, Clone)]
pub struct FrameProducts<T: Real> {
    pub rdm: Rdm<T>,
    pub clusters: Vec<Cluster>,
    pub detections: Vec<Detection>,
    pub point_cloud: PointCloud,
    pub diagnostics: Vec<Diagnostic>,
}

/// Range FFT, Doppler FFT, RDM, CA-CFAR, clustering, angle FFT and ground
/// projection.
pub fn process_frame<T: Real>(
    cube: &DataCube<T>,
    config: &RadarConfig,
    radar: &RadarPose,
    params: &DspParams,
) -> Result<FrameProducts<T>> {
    params.validate()?;
    let expected = (config.array.channels(), config.chirp.samples_per_chirp, config.frame.chirps_per_frame);
    if cube.samples.dim() != expected {
        return Err(SimError::InvalidParameter(format!(
            "cube shape {:?} does not match the configuration {expected:?}",
            cube.samples.dim()
        )));
    }
    let mapping = BinMapping::new(config);
    let profiles = range_fft(cube, params.range_window)?;
    let doppler = doppler_fft(&profiles, params.doppler_window)?;
    let rdm = form_rdm(&doppler, &mapping)?;
    let hits = cfar_2d(&rdm.power, &params.cfar)?;
    let clusters = cluster_hits(&hits, &rdm.power);

    let spacing = config.array.spacing(&config.chirp);
    let wavelength = config.chirp.wavelength();
    let mut diagnostics = Vec::new();
    let mut detections = Vec::new();
    for (id, cluster) in clusters.iter().enumerate() {
        for h in significant_cells(cluster, &rdm.power, params.cluster_floor_db) {
            let range = mapping.range(h.range_bin as f64);
            let cone = match angle_fft(&doppler, h.range_bin, h.doppler_bin, params.angle_fft_size, spacing, wavelength) {
                Ok(a) => a,
                Err(SimError::AngleUnavailable) => {
                    if !diagnostics.contains(&Diagnostic::AngleUnavailable) {
                        diagnostics.push(Diagnostic::AngleUnavailable);
                    }
                    0.0
                }
                Err(e) => return Err(e),
            };
            // cells at or inside the radar height keep the cone angle; the
            // projection below drops them
            let azimuth = cone_to_azimuth(cone, range, radar.height()).unwrap_or(cone);
            detections.push(Detection {
                range_bin: h.range_bin,
                doppler_bin: h.doppler_bin,
                range,
                radial_velocity: mapping.velocity(h.doppler_bin as f64),
                azimuth,
                snr_db: h.snr_db,
                power_db: rdm.magnitude_db[[h.range_bin, h.doppler_bin]].to_f64_lossy(),
                cluster: id,
            });
        }
    }
    let (point_cloud, dropped) = to_point_cloud(&detections, radar);
    diagnostics.extend(dropped);
    Ok(FrameProducts { rdm, clusters, detections, point_cloud, diagnostics })
}
