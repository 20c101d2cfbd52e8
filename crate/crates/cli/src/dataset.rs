use std::io::Write;
use std::path::{Path, PathBuf};

use mmwsim::dsp::DspParams;
use mmwsim::rcs::VehicleClass;
use mmwsim::scene::TargetTrack;
use mmwsim::waveform::{ArrayConfig, ChirpConfig, FrameConfig, LinkBudget, RadarConfig, RcsSettings};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{rdm_image, write_png, ArtifactMeta};
use crate::config::{config_hash, validate_sensor, ExportConfig, SceneConfig};
use crate::error::{CliError, CliResult};
use crate::run::simulate_frame;

/// Labeled RDM image set description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "all_classes")]
    pub classes: Vec<VehicleClass>,
    #[serde(default = "default_runs")]
    pub runs_per_class: usize,
    /// Slant distance range, m.
    #[serde(default = "default_distance")]
    pub distance_range: [f64; 2],
    /// Speed range, m/s.
    #[serde(default = "default_speed")]
    pub speed_range: [f64; 2],
    #[serde(default = "default_lanes")]
    pub lanes: Vec<usize>,
    #[serde(default = "default_image_size")]
    pub image_size: usize,
    #[serde(default = "default_dynamic_range")]
    pub dynamic_range_db: f64,
    /// Lanes and radar mounting; targets must be empty.
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
}

fn all_classes() -> Vec<VehicleClass> {
    VehicleClass::ALL.to_vec()
}

fn default_runs() -> usize {
    20
}

fn default_distance() -> [f64; 2] {
    [25.0, 40.0]
}

fn default_speed() -> [f64; 2] {
    [0.5, 10.0]
}

fn default_lanes() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_image_size() -> usize {
    451
}

fn default_dynamic_range() -> f64 {
    60.0
}

impl DatasetSpec {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let spec: DatasetSpec = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(message) => CliError::Parse { path: path.to_path_buf(), message },
            other => other,
        })
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
        let export = ExportConfig {
            image_size: self.image_size,
            dynamic_range_db: self.dynamic_range_db,
            ..ExportConfig::default()
        };
        validate_sensor(&self.radar(), &self.dsp, &export)?;
        let ordered = |r: [f64; 2], what: &str| {
            if r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} must be an ordered [min, max] pair")))
            }
        };
        ordered(self.distance_range, "distance_range")?;
        ordered(self.speed_range, "speed_range")?;
        if self.speed_range[0] < 0.0 {
            return Err(CliError::Config("speed_range must be non-negative".into()));
        }
        if self.lanes.is_empty() || self.classes.is_empty() {
            return Err(CliError::Config("lanes and classes must be non-empty".into()));
        }
        for &lane in &self.lanes {
            self.scene.lanes.lane_center(lane).map_err(|e| CliError::Config(e.to_string()))?;
        }
        if !self.scene.targets.is_empty() {
            return Err(CliError::Config("dataset scenes are generated; remove scene.targets".into()));
        }
        Ok(())
    }

    pub fn hash(&self) -> u32 {
        let mut s = self.clone();
        s.output_dir = None;
        config_hash(&s)
    }
}

/// One generated image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    /// Path relative to the dataset root.
    pub file: String,
    pub class: VehicleClass,
    /// Index of the class in the dataset's class list.
    pub label: usize,
    pub distance_m: f64,
    pub speed_mps: f64,
    pub lane: usize,
    /// Noise seed of the run.
    pub seed: u64,
}

/// Draw for run `run` of class `class_index`; independent of evaluation order.
fn sample_run(spec: &DatasetSpec, class_index: usize, run: usize) -> (f64, f64, usize, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(((class_index as u64) << 32) | run as u64);
    let draw = |rng: &mut ChaCha8Rng, r: [f64; 2]| if r[1] > r[0] { rng.random_range(r[0]..r[1]) } else { r[0] };
    let distance = draw(&mut rng, spec.distance_range);
    let speed = draw(&mut rng, spec.speed_range);
    let lane = spec.lanes[rng.random_range(0..spec.lanes.len())];
    (distance, speed, lane, rng.next_u64())
}

/// Simulates `runs_per_class` single-vehicle scenes per class in parallel and
/// writes `<class>/NNN.png` plus `manifest.csv` under `out`.
pub fn generate_dataset(spec: &DatasetSpec, out: &Path) -> CliResult<Vec<ManifestEntry>> {
    spec.validate()?;
    let radar = spec.radar();
    let pose = mmwsim::scene::RadarPose::new(spec.scene.radar_height, spec.scene.downtilt_deg)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let layout = spec.scene.lanes.clone();
    let library = mmwsim::waveform::TargetLibrary::builtin()?;
    let meta = ArtifactMeta { seed: spec.seed, config_hash: spec.hash() };
    for class in &spec.classes {
        let dir = out.join(class.name());
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    }
    let jobs: Vec<(usize, usize)> =
        (0..spec.classes.len()).flat_map(|c| (0..spec.runs_per_class).map(move |r| (c, r))).collect();
    let entries = jobs
        .par_iter()
        .map(|&(ci, run)| {
            let class = spec.classes[ci];
            let (distance, speed, lane, seed) = sample_run(spec, ci, run);
            let track = TargetTrack::approaching_at_distance("target", class, &layout, &pose, lane, distance, speed)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let scene = mmwsim::scene::Scene::new(layout.clone(), pose, vec![track])?;
            let sim = simulate_frame::<f32>(&radar, &spec.dsp, &scene, &library, 0, seed)?;
            let pixels = rdm_image(&sim.products.rdm, spec.image_size, spec.dynamic_range_db);
            let file = format!("{}/{run:03}.png", class.name());
            write_png(&out.join(&file), &pixels, spec.image_size, &ArtifactMeta { seed, ..meta })?;
            Ok(ManifestEntry { file, class, label: ci, distance_m: distance, speed_mps: speed, lane, seed })
        })
        .collect::<CliResult<Vec<_>>>()?;
    write_manifest(&entries, out, &meta)?;
    Ok(entries)
}

fn write_manifest(entries: &[ManifestEntry], out: &Path, meta: &ArtifactMeta) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join("manifest.csv");
    let mut buf = Vec::new();
    writeln!(buf, "# {}", meta.comment()).expect("in-memory write");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["file", "class", "label", "distance_m", "speed_mps", "lane", "seed"])
            .expect("in-memory write");
        for e in entries {
            w.write_record([
                e.file.clone(),
                e.class.to_string(),
                e.label.to_string(),
                e.distance_m.to_string(),
                e.speed_mps.to_string(),
                e.lane.to_string(),
                e.seed.to_string(),
            ])
            .expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    std::fs::write(&path, buf).map_err(|e| CliError::io(&path, e))
}
