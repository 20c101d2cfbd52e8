use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mmwsim::dsp::DspParams;
use mmwsim::rcs::{load_mesh, VehicleClass};
use mmwsim::scene::{LaneLayout, RadarPose, Scene, TargetTrack};
use mmwsim::waveform::{ArrayConfig, ChirpConfig, FrameConfig, LinkBudget, RadarConfig, RcsSettings, TargetLibrary};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// One vehicle in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub id: String,
    pub class: VehicleClass,
    /// 1-based lane number.
    pub lane: usize,
    /// Slant range from the radar to the vehicle's leading edge at t = 0, m.
    pub distance: f64,
    /// Ground speed toward the radar, m/s.
    pub speed: f64,
    /// Replace the mesh by an ideal point scatterer of this RCS, m^2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_rcs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub lanes: LaneLayout,
    pub radar_height: f64,
    pub downtilt_deg: f64,
    /// Class name to mesh file (ASCII STL or vertex list) overriding the
    /// built-in mesh.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub meshes: BTreeMap<String, PathBuf>,
    pub targets: Vec<TargetConfig>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            lanes: LaneLayout::default(),
            radar_height: RadarPose::DEFAULT_HEIGHT,
            downtilt_deg: RadarPose::DEFAULT_DOWNTILT_DEG,
            meshes: BTreeMap::new(),
            targets: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

/// Artifact options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportConfig {
    /// Side of the square RDM image, pixels.
    pub image_size: usize,
    /// dB span below the peak kept in the image.
    pub dynamic_range_db: f64,
    pub write_cube: bool,
    /// Sample precision of the cube and the processing chain.
    pub precision: Precision,
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self { image_size: 451, dynamic_range_db: 60.0, write_cube: true, precision: Precision::F32 }
    }
}

impl ExportConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.image_size == 0 {
            return Err(CliError::Config("export.image_size must be positive".into()));
        }
        if !(self.dynamic_range_db > 0.0) {
            return Err(CliError::Config("export.dynamic_range_db must be positive".into()));
        }
        Ok(())
    }
}

/// Validates the sensor and processing sections shared by run and dataset
/// configs.
pub fn validate_sensor(radar: &RadarConfig, dsp: &DspParams, export: &ExportConfig) -> CliResult<()> {
    radar.validate().map_err(|e| CliError::Config(e.to_string()))?;
    dsp.validate().map_err(|e| CliError::Config(e.to_string()))?;
    export.validate()
}

/// A complete single-run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub scene: SceneConfig,
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
    #[serde(default)]
    pub dsp: DspParams,
    #[serde(default)]
    pub export: ExportConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(message) => CliError::Parse { path: path.to_path_buf(), message },
            other => other,
        })?;
        // relative mesh paths are relative to the config file
        if let Some(dir) = path.parent() {
            for p in cfg.scene.meshes.values_mut() {
                if p.is_relative() {
                    *p = dir.join(&p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn radar(&self) -> RadarConfig {
        RadarConfig {
            chirp: self.chirp.clone(),
            frame: self.frame.clone(),
            array: self.array.clone(),
            link: self.link.clone(),
            rcs: self.rcs.clone(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        validate_sensor(&self.radar(), &self.dsp, &self.export)?;
        self.scene.lanes.validate().map_err(|e| CliError::Config(e.to_string()))?;
        for name in self.scene.meshes.keys() {
            name.parse::<VehicleClass>().map_err(CliError::Config)?;
        }
        let mut ids = std::collections::BTreeSet::new();
        for t in &self.scene.targets {
            if !ids.insert(&t.id) {
                return Err(CliError::Config(format!("duplicate target id `{}`", t.id)));
            }
        }
        self.scene().map(|_| ())
    }

    pub fn radar_pose(&self) -> CliResult<RadarPose> {
        RadarPose::new(self.scene.radar_height, self.scene.downtilt_deg).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn scene(&self) -> CliResult<Scene> {
        let radar = self.radar_pose()?;
        let layout = self.scene.lanes.clone();
        let targets = self
            .scene
            .targets
            .iter()
            .map(|t| {
                let track =
                    TargetTrack::approaching_at_distance(&t.id, t.class, &layout, &radar, t.lane, t.distance, t.speed)
                        .map_err(|e| CliError::Config(format!("target `{}`: {e}", t.id)))?;
                Ok(match t.point_rcs {
                    Some(s) => track.with_point_rcs(s),
                    None => track,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        Scene::new(layout, radar, targets).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Built-in meshes with the configured overrides.
    pub fn library(&self) -> CliResult<TargetLibrary> {
        let mut lib = TargetLibrary::builtin()?;
        for (name, path) in &self.scene.meshes {
            let class = name.parse::<VehicleClass>().map_err(CliError::Config)?;
            let mesh = load_mesh(path).map_err(|e| match e {
                mmwsim::SimError::Io(source) => CliError::io(path, source),
                other => CliError::Config(format!("{}: {other}", path.display())),
            })?;
            lib = lib.with_mesh(class, mesh)?;
        }
        Ok(lib)
    }

    /// Short hash of everything that shapes the results (the output
    /// directory excluded).
    pub fn hash(&self) -> u32 {
        let mut c = self.clone();
        c.output_dir = None;
        config_hash(&c)
    }
}

/// First four bytes of the SHA-256 of the canonical TOML form.
pub fn config_hash<T: Serialize>(value: &T) -> u32 {
    let text = toml::to_string(value).expect("config serializes");
    let digest = Sha256::digest(text.as_bytes());
    u32::from_be_bytes([digest[0], digest[1], digest[2], digest[3]])
}
