use std::path::{Path, PathBuf};

use mmwsim::dsp::{process_frame, BinMapping, DspParams, FrameProducts};
use mmwsim::scene::{LaneLayout, Scene};
use mmwsim::waveform::{FrameSynthesizer, RadarConfig, SynthesizedFrame, TargetLibrary, TargetTruth};
use mmwsim::Real;
use serde::Serialize;

use crate::artifacts::{export_rdm_image, write_cube, write_point_cloud_csv, write_rdm_csv, ArtifactMeta};
use crate::config::{Precision, RunConfig};
use crate::error::{CliError, CliResult};

/// Range slack around a vehicle's extent when matching clusters to it, m.
const RANGE_GATE: f64 = 1.5;
/// Doppler slack when matching clusters to a target, bins.
const DOPPLER_GATE: f64 = 3.0;

/// Cube and processing products of one frame.
pub struct SimulatedFrame<T: Real> {
    pub synthesized: SynthesizedFrame<T>,
    pub products: FrameProducts<T>,
}

pub fn simulate_frame<T: Real>(
    radar: &RadarConfig,
    dsp: &DspParams,
    scene: &Scene,
    library: &TargetLibrary,
    frame: usize,
    seed: u64,
) -> CliResult<SimulatedFrame<T>> {
    let synth = FrameSynthesizer::new(radar, scene, library)?;
    let synthesized = synth.synthesize_frame::<T>(frame, seed)?;
    let products = process_frame(&synthesized.cube, radar, &scene.radar, dsp)?;
    Ok(SimulatedFrame { synthesized, products })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadarSummary {
    pub bandwidth_hz: f64,
    pub range_resolution_m: f64,
    pub max_range_m: f64,
    pub max_speed_mps: f64,
    pub chirp_period_s: f64,
    pub range_bins: usize,
    pub doppler_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakSummary {
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub range_m: f64,
    pub velocity_mps: f64,
    pub power_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthSummary {
    pub range_m: f64,
    pub radial_velocity_mps: f64,
    pub azimuth_deg: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub lane: usize,
    pub mean_rcs_dbsm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectedSummary {
    pub range_m: f64,
    pub radial_velocity_mps: f64,
    pub azimuth_deg: f64,
    /// Centroid of the nearest matched cluster.
    pub x_m: f64,
    pub y_m: f64,
    pub lane: usize,
    pub range_bin: usize,
    pub doppler_bin: usize,
    /// Points of the nearest matched cluster.
    pub cluster_points: usize,
    /// Points of every cluster matched to the target.
    pub target_points: usize,
    pub range_error_bins: f64,
    /// Against the true velocity folded into the unambiguous interval.
    pub doppler_error_bins: f64,
    /// Reported minus true (unfolded) radial velocity, m/s.
    pub velocity_error_mps: f64,
    pub position_error_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSummary {
    pub id: String,
    pub class: String,
    pub truth: TruthSummary,
    /// True speed beyond the unambiguous interval.
    pub doppler_aliased: bool,
    pub detected: Option<DetectedSummary>,
}

/// One JSON document per frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub config_hash: String,
    pub frame: usize,
    pub radar: RadarSummary,
    pub rdm_peak: PeakSummary,
    pub clusters: usize,
    pub detections: usize,
    pub points: usize,
    pub targets: Vec<TargetSummary>,
    pub diagnostics: Vec<String>,
}

fn radar_summary(radar: &RadarConfig, mapping: &BinMapping) -> RadarSummary {
    RadarSummary {
        bandwidth_hz: radar.chirp.bandwidth(),
        range_resolution_m: radar.chirp.range_resolution(),
        max_range_m: radar.chirp.max_range(),
        max_speed_mps: mapping.max_speed(),
        chirp_period_s: radar.chirp.chirp_period(),
        range_bins: mapping.range_fft_size,
        doppler_bins: mapping.doppler_fft_size,
    }
}

fn circular_diff(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    if d > 0.5 * period { d - period } else { d }
}

/// Matches clusters to one target by range extent and Doppler and reports
/// the nearest match.
pub fn evaluate_target<T: Real>(
    truth: &TargetTruth,
    products: &FrameProducts<T>,
    mapping: &BinMapping,
    layout: &LaneLayout,
    point_target: bool,
) -> TargetSummary {
    let look = &truth.look;
    let length = if point_target { 0.0 } else { truth.class.dimensions().0 };
    let kd = mapping.doppler_fft_size as f64;
    let expected_doppler = mapping.doppler_bin(look.radial_velocity).rem_euclid(kd);
    let matched: Vec<usize> = products
        .clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let p = c.peak();
            let r = mapping.range(p.range_bin as f64);
            r >= look.range - RANGE_GATE
                && r <= look.range + length + RANGE_GATE
                && circular_diff(p.doppler_bin as f64, expected_doppler, kd).abs() <= DOPPLER_GATE
        })
        .map(|(i, _)| i)
        .collect();
    let truth_summary = TruthSummary {
        range_m: look.range,
        radial_velocity_mps: look.radial_velocity,
        azimuth_deg: look.azimuth.to_degrees(),
        x_m: truth.position.x,
        y_m: truth.position.y,
        lane: truth.lane,
        mean_rcs_dbsm: 10.0 * truth.mean_rcs.max(1e-30).log10(),
    };
    // the leading edge is what the target's distance refers to
    let nearest = matched.iter().copied().min_by_key(|&c| products.clusters[c].peak().range_bin);
    let detected = nearest.and_then(|best| {
        let (x, y) = products.point_cloud.centroid(best)?;
        let peak = products.clusters[best].peak();
        let det = products
            .detections
            .iter()
            .find(|d| d.cluster == best && d.range_bin == peak.range_bin && d.doppler_bin == peak.doppler_bin)?;
        let count = |c: usize| products.point_cloud.points.iter().filter(|p| p.cluster == c).count();
        Some(DetectedSummary {
            range_m: det.range,
            radial_velocity_mps: det.radial_velocity,
            azimuth_deg: det.azimuth.to_degrees(),
            x_m: x,
            y_m: y,
            lane: layout.nearest_lane(x),
            range_bin: det.range_bin,
            doppler_bin: det.doppler_bin,
            cluster_points: count(best),
            target_points: matched.iter().map(|&c| count(c)).sum(),
            range_error_bins: det.range_bin as f64 - mapping.range_bin(look.range),
            doppler_error_bins: circular_diff(det.doppler_bin as f64, expected_doppler, kd),
            velocity_error_mps: det.radial_velocity - look.radial_velocity,
            position_error_m: ((x - truth.position.x).powi(2) + (y - truth.position.y).powi(2)).sqrt(),
        })
    });
    TargetSummary {
        id: truth.target_id.clone(),
        class: truth.class.to_string(),
        truth: truth_summary,
        doppler_aliased: look.radial_velocity.abs() > mapping.max_speed(),
        detected,
    }
}

pub fn summarize<T: Real>(
    cfg: &RunConfig,
    scene: &Scene,
    frame: usize,
    seed: u64,
    sim: &SimulatedFrame<T>,
) -> Summary {
    let radar = cfg.radar();
    let mapping = BinMapping::new(&radar);
    let rdm = &sim.products.rdm;
    let (rb, db) = rdm.peak();
    let targets = sim
        .synthesized
        .truth
        .iter()
        .map(|t| {
            let point = scene.targets.iter().any(|s| s.target_id == t.target_id && s.point_rcs.is_some());
            evaluate_target(t, &sim.products, &mapping, &scene.layout, point)
        })
        .collect();
    let diagnostics = sim
        .synthesized
        .diagnostics
        .iter()
        .chain(&sim.products.diagnostics)
        .map(|d| d.to_string())
        .collect();
    Summary {
        seed,
        config_hash: format!("{:08x}", cfg.hash()),
        frame,
        radar: radar_summary(&radar, &mapping),
        rdm_peak: PeakSummary {
            range_bin: rb,
            doppler_bin: db,
            range_m: rdm.range_axis[rb],
            velocity_mps: rdm.velocity_axis[db],
            power_db: rdm.magnitude_db[[rb, db]].to_f64_lossy(),
        },
        clusters: sim.products.clusters.len(),
        detections: sim.products.detections.len(),
        points: sim.products.point_cloud.len(),
        targets,
        diagnostics,
    }
}

/// Result of [`run_single`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summaries: Vec<Summary>,
    pub files: Vec<PathBuf>,
}

fn frame_dir(out: &Path, frame: usize, frames: usize) -> PathBuf {
    if frames == 1 {
        out.to_path_buf()
    } else {
        out.join(format!("frame_{frame:03}"))
    }
}

fn write_frame<T: Real>(
    cfg: &RunConfig,
    dir: &Path,
    sim: &SimulatedFrame<T>,
    summary: &Summary,
    meta: &ArtifactMeta,
) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    let rdm = &sim.products.rdm;
    let csv = dir.join("rdm.csv");
    write_rdm_csv(rdm, &csv, meta)?;
    files.push(csv);
    let (pgm, png) = export_rdm_image(rdm, cfg.export.image_size, cfg.export.dynamic_range_db, &dir.join("rdm"), meta)?;
    files.extend([pgm, png]);
    let points = dir.join("points.csv");
    write_point_cloud_csv(&sim.products.point_cloud, &points, meta)?;
    files.push(points);
    if cfg.export.write_cube {
        let cube = dir.join("cube.bin");
        write_cube(&sim.synthesized.cube, &cube)?;
        files.push(cube);
    }
    let json = dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    std::fs::write(&json, text + "\n").map_err(|e| CliError::io(&json, e))?;
    files.push(json);
    Ok(files)
}

fn run_typed<T: Real>(cfg: &RunConfig, out: &Path) -> CliResult<RunOutcome> {
    let scene = cfg.scene()?;
    let library = cfg.library()?;
    let radar = cfg.radar();
    let meta = ArtifactMeta { seed: cfg.seed, config_hash: cfg.hash() };
    let synth = FrameSynthesizer::new(&radar, &scene, &library)?;
    let frames = radar.frame.frames;
    let mut outcome = RunOutcome { summaries: Vec::new(), files: Vec::new() };
    for frame in 0..frames {
        // one synthesizer across frames keeps the response cache warm
        let mut synthesized = synth.synthesize_frame::<T>(frame, cfg.seed)?;
        synthesized.cube.config_hash = meta.config_hash;
        let products = process_frame(&synthesized.cube, &radar, &scene.radar, &cfg.dsp)?;
        let sim = SimulatedFrame { synthesized, products };
        let summary = summarize(cfg, &scene, frame, cfg.seed, &sim);
        for d in &summary.diagnostics {
            log::warn!("frame {frame}: {d}");
        }
        outcome.files.extend(write_frame(cfg, &frame_dir(out, frame, frames), &sim, &summary, &meta)?);
        outcome.summaries.push(summary);
    }
    Ok(outcome)
}

/// Simulates every frame of `cfg` and writes RDM CSV and images, the point
/// cloud, the cube dump and a JSON summary under `out`.
pub fn run_single(cfg: &RunConfig, out: &Path) -> CliResult<RunOutcome> {
    cfg.validate()?;
    match cfg.export.precision {
        Precision::F32 => run_typed::<f32>(cfg, out),
        Precision::F64 => run_typed::<f64>(cfg, out),
    }
}
