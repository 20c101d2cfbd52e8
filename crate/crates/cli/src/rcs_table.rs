use std::io::Write;
use std::path::{Path, PathBuf};

use mmwsim::rcs::{builtin_vehicle_mesh, load_mesh, trace_bidirectional, ScatterResponse, ScatteringModel, TraceParams, VehicleClass};
use mmwsim::rcs::frequency_grid;
use mmwsim::scene::Vec3;
use mmwsim::waveform::{ChirpConfig, RcsSettings};
use serde::{Deserialize, Serialize};

use crate::artifacts::ArtifactMeta;
use crate::config::config_hash;
use crate::error::{CliError, CliResult};

/// Monostatic RCS table request for one mesh over a set of aspect angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcsTableConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<VehicleClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    /// Aspect angles, degrees from head-on, positive toward the mesh's +X side.
    #[serde(default = "head_on")]
    pub azimuth_deg: Vec<f64>,
    /// Angle below the horizontal at which the radar looks down, degrees.
    #[serde(default)]
    pub depression_deg: f64,
    /// Band swept for the frequency response.
    #[serde(default)]
    pub chirp: ChirpConfig,
    #[serde(default)]
    pub rcs: RcsSettings,
}

fn head_on() -> Vec<f64> {
    vec![0.0]
}

impl RcsTableConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        if let (Some(m), Some(dir)) = (cfg.mesh.as_mut(), path.parent()) {
            if m.is_relative() {
                *m = dir.join(&*m);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.class.is_some() == self.mesh.is_some() {
            return Err(CliError::Config("give exactly one of `class` and `mesh`".into()));
        }
        if self.azimuth_deg.is_empty() || self.azimuth_deg.iter().any(|a| !a.is_finite()) {
            return Err(CliError::Config("azimuth_deg must list finite angles".into()));
        }
        if !(self.depression_deg.abs() < 90.0) {
            return Err(CliError::Config("depression_deg must lie in (-90, 90)".into()));
        }
        self.chirp.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.rcs.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Band-averaged result at one aspect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RcsRow {
    pub azimuth_deg: f64,
    pub mean_rcs_m2: f64,
    pub mean_rcs_dbsm: f64,
    pub paths: usize,
    pub centers: usize,
    pub reconstruction_error: f64,
}

/// Propagation direction toward a mesh whose front faces -Y.
pub fn aspect_direction(azimuth_deg: f64, depression_deg: f64) -> Vec3 {
    let (a, e) = (azimuth_deg.to_radians(), depression_deg.to_radians());
    Vec3::new(a.sin() * e.cos(), a.cos() * e.cos(), -e.sin())
}

/// Traces every aspect and writes `rcs_angle.csv` (band average per aspect)
/// and `rcs_frequency.csv` (complex response per aspect and frequency).
pub fn run_rcs_table(cfg: &RcsTableConfig, out: &Path) -> CliResult<Vec<RcsRow>> {
    cfg.validate()?;
    let mesh = match (&cfg.class, &cfg.mesh) {
        (Some(c), _) => builtin_vehicle_mesh(*c),
        (None, Some(p)) => load_mesh(p).map_err(|e| match e {
            mmwsim::SimError::Io(source) => CliError::io(p, source),
            other => CliError::Config(format!("{}: {other}", p.display())),
        })?,
        (None, None) => unreachable!("validated"),
    };
    let model = ScatteringModel::new(mesh)?;
    let chirp = &cfg.chirp;
    let freqs = frequency_grid(chirp.start_frequency, chirp.bandwidth(), cfg.rcs.frequency_samples);
    let params = TraceParams {
        max_bounce: cfg.rcs.max_bounce,
        rays_per_wavelength: cfg.rcs.rays_per_wavelength,
        frequency: chirp.start_frequency + 0.5 * chirp.bandwidth(),
        ..TraceParams::default()
    };
    let meta = ArtifactMeta { seed: 0, config_hash: config_hash(cfg) };
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut angle = Vec::new();
    let mut freq = Vec::new();
    writeln!(angle, "# {}", meta.comment()).expect("in-memory write");
    writeln!(freq, "# {}", meta.comment()).expect("in-memory write");
    let mut aw = csv::Writer::from_writer(angle);
    let mut fw = csv::Writer::from_writer(freq);
    aw.write_record(["azimuth_deg", "mean_rcs_m2", "mean_rcs_dbsm", "paths", "centers", "reconstruction_error"])
        .expect("in-memory write");
    fw.write_record(["azimuth_deg", "frequency_hz", "re", "im", "rcs_dbsm"]).expect("in-memory write");
    let mut rows = Vec::new();
    for &az in &cfg.azimuth_deg {
        let trace = trace_bidirectional(&model, &aspect_direction(az, cfg.depression_deg), &params)?;
        let response = ScatterResponse::from_trace(&trace, freqs.clone(), cfg.rcs.max_centers)?;
        let mean = response.mean_rcs();
        let row = RcsRow {
            azimuth_deg: az,
            mean_rcs_m2: mean,
            mean_rcs_dbsm: 10.0 * mean.max(1e-30).log10(),
            paths: trace.paths.len(),
            centers: response.scattering_centers.len(),
            reconstruction_error: response.reconstruction_error(),
        };
        aw.write_record([
            az.to_string(),
            row.mean_rcs_m2.to_string(),
            row.mean_rcs_dbsm.to_string(),
            row.paths.to_string(),
            row.centers.to_string(),
            row.reconstruction_error.to_string(),
        ])
        .expect("in-memory write");
        for (f, s) in response.frequencies.iter().zip(&response.sigma_f) {
            let db = 10.0 * s.norm_sqr().max(1e-30).log10();
            fw.write_record([az, *f, s.re, s.im, db].map(|v| v.to_string())).expect("in-memory write");
        }
        rows.push(row);
    }
    for (name, w) in [("rcs_angle.csv", aw), ("rcs_frequency.csv", fw)] {
        let path = out.join(name);
        let bytes = w.into_inner().expect("in-memory write");
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_exactly_one_source() {
        let both: RcsTableConfig = toml::from_str("class = \"car\"\nmesh = \"a.stl\"\n").unwrap();
        assert!(both.validate().is_err());
        let none: RcsTableConfig = toml::from_str("depression_deg = 5.0\n").unwrap();
        assert!(none.validate().is_err());
    }

    #[test]
    fn head_on_is_plus_y() {
        let d = aspect_direction(0.0, 0.0);
        assert!((d - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!(aspect_direction(0.0, 10.0).z < 0.0);
    }
}
