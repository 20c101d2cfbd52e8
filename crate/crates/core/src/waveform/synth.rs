use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::{Complex, Complex64};
use rayon::prelude::*;

use crate::diagnostics::Diagnostic;
use crate::error::{Result, SimError};
use crate::rcs::{
    builtin_vehicle_mesh, frequency_grid, incident_direction, trace_look, ScatterResponse, ScatteringCenter,
    ScatteringModel, TraceParams, TriangleMesh, VehicleClass,
};
use crate::scalar::{Real, SPEED_OF_LIGHT};
use crate::scene::{look_geometry, LookGeometry, Scene, TargetTrack, Vec3};
use crate::waveform::{add_noise, array_axis, accumulate_echo, received_power, DataCube, EchoGeometry, RadarConfig};

/// Scattering models per vehicle class.
#[derive(Debug, Clone)]
pub struct TargetLibrary {
    models: HashMap<VehicleClass, Arc<ScatteringModel>>,
}

impl TargetLibrary {
    /// Built-in primitive-composite meshes for every class.
    pub fn builtin() -> Result<Self> {
        let mut models = HashMap::new();
        for class in VehicleClass::ALL {
            models.insert(class, Arc::new(ScatteringModel::new(builtin_vehicle_mesh(class))?));
        }
        Ok(Self { models })
    }

    /// Replaces the mesh used for `class`.
    pub fn with_mesh(mut self, class: VehicleClass, mesh: TriangleMesh) -> Result<Self> {
        self.models.insert(class, Arc::new(ScatteringModel::new(mesh)?));
        Ok(self)
    }

    pub fn model(&self, class: VehicleClass) -> Result<Arc<ScatteringModel>> {
        self.models
            .get(&class)
            .cloned()
            .ok_or_else(|| SimError::InvalidParameter(format!("no mesh for class `{class}`")))
    }
}

/// Where a target was when its frame started.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetTruth {
    pub target_id: String,
    pub class: VehicleClass,
    pub lane: usize,
    /// Tracked point (ground projection of the leading face).
    pub position: Vec3,
    pub velocity: Vec3,
    pub look: LookGeometry,
    /// Band-averaged RCS of the response used for the frame, m^2.
    pub mean_rcs: f64,
}

/// Output of [`FrameSynthesizer::synthesize_frame`].
#[derive(Debug, Clone)]
pub struct SynthesizedFrame<T: Real> {
    pub cube: DataCube<T>,
    pub truth: Vec<TargetTruth>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
struct CachedResponse {
    incident: Vec3,
    response: Arc<ScatterResponse>,
}

/// Per-target echo inputs for one frame.
struct TargetEcho {
    centers: Vec<ScatteringCenter>,
    /// Geometry at the start of every chirp.
    geometry: Vec<EchoGeometry>,
    /// Unit line of sight at every chirp.
    los: Vec<Vec3>,
}

/// Builds IF data cubes for a scene. Scattering responses are cached per
/// target and re-traced only when the look direction moves by more than the
/// configured threshold.
pub struct FrameSynthesizer<'a> {
    config: &'a RadarConfig,
    scene: &'a Scene,
    library: &'a TargetLibrary,
    cache: Mutex<HashMap<String, CachedResponse>>,
    traces: Mutex<usize>,
}

impl<'a> FrameSynthesizer<'a> {
    pub fn new(config: &'a RadarConfig, scene: &'a Scene, library: &'a TargetLibrary) -> Result<Self> {
        config.validate()?;
        scene.layout.validate()?;
        for t in &scene.targets {
            t.validate(&scene.layout)?;
        }
        Ok(Self { config, scene, library, cache: Mutex::new(HashMap::new()), traces: Mutex::new(0) })
    }

    /// Number of ray traces run so far.
    pub fn traces_run(&self) -> usize {
        *self.traces.lock().expect("trace counter poisoned")
    }

    fn frequencies(&self) -> Vec<f64> {
        let c = &self.config.chirp;
        frequency_grid(c.start_frequency, c.bandwidth(), self.config.rcs.frequency_samples)
    }

    /// Scattering response of `track` seen along `look`, from the cache when
    /// the aspect has not moved past the re-trace threshold.
    pub fn response(&self, track: &TargetTrack, look: &LookGeometry) -> Result<Arc<ScatterResponse>> {
        if let Some(sigma) = track.point_rcs {
            return Ok(Arc::new(ScatterResponse::point(self.frequencies(), Complex64::new(sigma.sqrt(), 0.0))));
        }
        let incident = incident_direction(look, &track.heading);
        let threshold = self.config.rcs.retrace_threshold_deg.to_radians();
        if let Some(hit) = self.cache.lock().expect("cache poisoned").get(&track.target_id) {
            if hit.incident.angle(&incident) <= threshold {
                return Ok(hit.response.clone());
            }
        }
        let rcs = &self.config.rcs;
        let chirp = &self.config.chirp;
        let params = TraceParams {
            max_bounce: rcs.max_bounce,
            rays_per_wavelength: rcs.rays_per_wavelength,
            frequency: chirp.start_frequency + 0.5 * chirp.bandwidth(),
            ..TraceParams::default()
        };
        let model = self.library.model(track.class)?;
        let trace = trace_look(&model, look, &self.scene.radar, &track.heading, &params)?;
        let response = Arc::new(ScatterResponse::from_trace(&trace, self.frequencies(), rcs.max_centers)?);
        *self.traces.lock().expect("trace counter poisoned") += 1;
        log::debug!(
            "traced `{}`: {} paths, {} centers, {:.1} dBsm",
            track.target_id,
            trace.paths.len(),
            response.scattering_centers.len(),
            10.0 * response.mean_rcs().max(1e-30).log10()
        );
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(track.target_id.clone(), CachedResponse { incident, response: response.clone() });
        Ok(response)
    }

    /// Synthesizes frame `frame_index` (which starts at
    /// `frame_index * N * Tc`) and adds noise drawn from `seed`.
    pub fn synthesize_frame<T: Real>(&self, frame_index: usize, seed: u64) -> Result<SynthesizedFrame<T>> {
        let cfg = self.config;
        let chirp = &cfg.chirp;
        let chirps = cfg.frame.chirps_per_frame;
        let samples = chirp.samples_per_chirp;
        let positions = cfg.array.virtual_positions(chirp);
        let axis = array_axis(&self.scene.radar.boresight);
        let t_frame = frame_index as f64 * cfg.frame_duration();
        let tc = chirp.chirp_period();
        let wavelength = chirp.wavelength();

        let mut truth = Vec::new();
        let mut diagnostics = Vec::new();
        let mut echoes = Vec::new();
        for track in &self.scene.targets {
            let (position, velocity) = track.pose_at(&self.scene.layout, t_frame)?;
            let look = look_geometry(&self.scene.radar, &position, &velocity)?;
            let response = self.response(track, &look)?;
            for d in &response.diagnostics {
                if !diagnostics.contains(d) {
                    diagnostics.push(d.clone());
                }
            }
            let mut geometry = Vec::with_capacity(chirps);
            let mut los = Vec::with_capacity(chirps);
            for n in 0..chirps {
                let (p, v) = track.pose_at(&self.scene.layout, t_frame + n as f64 * tc)?;
                let l = look_geometry(&self.scene.radar, &p, &v)?;
                geometry.push(EchoGeometry { range: l.range, range_rate: -l.radial_velocity });
                los.push(l.line_of_sight);
            }
            let max_path = positions.iter().fold(0.0f64, |m, p| m.max(p.abs()));
            let t_end = chirp.sample_time(samples - 1);
            let inside = |c: &ScatteringCenter| {
                [geometry.first(), geometry.last()].into_iter().flatten().all(|g| {
                    let lo = 2.0 * g.range / SPEED_OF_LIGHT + c.delay - max_path / SPEED_OF_LIGHT;
                    let hi = 2.0 * (g.range + g.range_rate * t_end) / SPEED_OF_LIGHT + c.delay + max_path / SPEED_OF_LIGHT;
                    lo >= 0.0 && lo.max(hi) < chirp.max_delay() && lo.min(hi) >= 0.0
                })
            };
            let (centers, dropped): (Vec<_>, Vec<_>) =
                response.scattering_centers.iter().cloned().partition(|c| inside(c));
            if !dropped.is_empty() {
                diagnostics.push(Diagnostic::CentersOutsideWindow {
                    target: track.target_id.clone(),
                    dropped: dropped.len(),
                });
            }
            truth.push(TargetTruth {
                target_id: track.target_id.clone(),
                class: track.class,
                lane: track.lane,
                position,
                velocity,
                look,
                mean_rcs: response.mean_rcs(),
            });
            echoes.push(TargetEcho { centers, geometry, los });
        }

        let link = &cfg.link;
        let columns: Vec<Vec<Complex64>> = (0..positions.len() * chirps)
            .into_par_iter()
            .map(|cell| {
                let (o, n) = (cell / chirps, cell % chirps);
                let mut out = vec![Complex64::new(0.0, 0.0); samples];
                for echo in &echoes {
                    let g = &echo.geometry[n];
                    let scales = echo
                        .centers
                        .iter()
                        .map(|c| {
                            let r = g.range + 0.5 * SPEED_OF_LIGHT * c.delay;
                            received_power(link, 1.0, r.max(f64::MIN_POSITIVE), wavelength).map(f64::sqrt)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let element_path = positions[o] * axis.dot(&echo.los[n]);
                    accumulate_echo(&mut out, chirp, &echo.centers, &scales, g, element_path)?;
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;

        let mut cube = DataCube::<T>::zeros(positions.len(), samples, chirps, chirp.sample_rate);
        for (cell, column) in columns.into_iter().enumerate() {
            let (o, n) = (cell / chirps, cell % chirps);
            for (m, v) in column.into_iter().enumerate() {
                cube.samples[[o, m, n]] = Complex::new(T::from_f64_lossy(v.re), T::from_f64_lossy(v.im));
            }
        }
        if let Some(d) = add_noise(&mut cube, link.snr_db, seed, frame_index as u64) {
            diagnostics.push(d);
        }
        Ok(SynthesizedFrame { cube, truth, diagnostics })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{default_intersection, RadarPose};

    fn point_scene(distance: f64, speed: f64) -> Scene {
        let layout = default_intersection();
        let radar = RadarPose::default();
        let t = TargetTrack::approaching_at_distance("p", VehicleClass::Car, &layout, &radar, 2, distance, speed)
            .unwrap()
            .with_point_rcs(10.0);
        Scene::new(layout, radar, vec![t]).unwrap()
    }

    fn quiet() -> RadarConfig {
        let mut c = RadarConfig::default();
        c.link.snr_db = f64::INFINITY;
        c.frame.chirps_per_frame = 16;
        c
    }

    #[test]
    fn empty_scene_is_unit_noise() {
        let mut cfg = quiet();
        cfg.link.snr_db = 0.0;
        let scene = Scene::empty();
        let lib = TargetLibrary::builtin().unwrap();
        let s = FrameSynthesizer::new(&cfg, &scene, &lib).unwrap();
        let f = s.synthesize_frame::<f64>(0, 1).unwrap();
        assert!(f.diagnostics.contains(&Diagnostic::ZeroSignalNoiseReference));
        let p = f.cube.channel_power();
        assert!(p.iter().all(|&x| (x - 1.0).abs() < 0.1), "{p:?}");
    }

    #[test]
    fn point_target_range_bin_all_chirps() {
        let cfg = quiet();
        let scene = point_scene(40.0, 0.0);
        let lib = TargetLibrary::builtin().unwrap();
        let s = FrameSynthesizer::new(&cfg, &scene, &lib).unwrap();
        let f = s.synthesize_frame::<f64>(0, 0).unwrap();
        assert_eq!(f.cube.samples.dim(), (4, 256, 16));
        let expected = (cfg.chirp.beat_frequency(40.0) * 256.0 / cfg.chirp.sample_rate).round() as usize;
        let mut planner = rustfft::FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(256);
        for n in 0..16 {
            let mut col: Vec<Complex64> = f.cube.samples.slice(ndarray::s![0, .., n]).to_vec();
            fft.process(&mut col);
            let peak = (0..256).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap();
            assert!(peak.abs_diff(expected) <= 1, "chirp {n}: {peak} vs {expected}");
        }
        assert_eq!(s.traces_run(), 0);
    }

    #[test]
    fn same_seed_same_cube() {
        let mut cfg = quiet();
        cfg.link.snr_db = 10.0;
        let scene = point_scene(30.0, 8.0);
        let lib = TargetLibrary::builtin().unwrap();
        let s = FrameSynthesizer::new(&cfg, &scene, &lib).unwrap();
        let a = s.synthesize_frame::<f32>(0, 9).unwrap();
        let b = s.synthesize_frame::<f32>(0, 9).unwrap();
        assert_eq!(a.cube, b.cube);
        let c = s.synthesize_frame::<f32>(0, 10).unwrap();
        assert_ne!(a.cube, c.cube);
    }

    #[test]
    fn far_target_centers_dropped() {
        let cfg = quiet();
        let scene = point_scene(70.0, 0.0);
        let lib = TargetLibrary::builtin().unwrap();
        let s = FrameSynthesizer::new(&cfg, &scene, &lib).unwrap();
        let f = s.synthesize_frame::<f64>(0, 0).unwrap();
        assert!(f
            .diagnostics
            .iter()
            .any(|d| matches!(d, Diagnostic::CentersOutsideWindow { dropped: 1, .. })));
        assert!(f.cube.samples.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn vehicle_response_is_cached_within_threshold() {
        let cfg = quiet();
        let layout = default_intersection();
        let radar = RadarPose::default();
        let t = TargetTrack::approaching_at_distance("c", VehicleClass::Car, &layout, &radar, 2, 40.0, 5.0).unwrap();
        let scene = Scene::new(layout, radar, vec![t]).unwrap();
        let lib = TargetLibrary::builtin().unwrap();
        let s = FrameSynthesizer::new(&cfg, &scene, &lib).unwrap();
        s.synthesize_frame::<f32>(0, 0).unwrap();
        s.synthesize_frame::<f32>(1, 0).unwrap();
        assert_eq!(s.traces_run(), 1);
    }
}
