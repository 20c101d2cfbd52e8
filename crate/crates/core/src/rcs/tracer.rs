//! Bidirectional ray tracing for monostatic far-field scattering.
//!
//! Forward rays leave the source as a plane wave on a regular grid of ray
//! tubes; backward rays leave the observer the same way. A forward ray that has
//! undergone `k_f` reflections and reaches facet `F` is joined to every
//! backward bundle that reaches `F` after `k_b` reflections. The join is a
//! physical-optics integral over the forward tube's footprint on `F`, radiating
//! into the reversed backward direction; the backward leg is then verified by
//! retracing it from the join point out to the observer. For a total of
//! `n = k_f + k_b + 1` bounces exactly one split is used, so every mechanism is
//! counted once.
//!
//! With source and observer colocated the two ray families coincide, so they
//! are launched once and the per-facet backward bundles are collected from the
//! same trace.
//!
//! Single reflections off facets that are wholly visible from the radar are
//! integrated over the whole triangle in closed form instead of per tube; the
//! staircase outline of a tube tiling otherwise dominates the weak off-specular
//! returns. Partially shadowed facets keep the tube footprints.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::diagnostics::Diagnostic;
use crate::error::{Result, SimError};
use crate::rcs::bvh::Bvh;
use crate::rcs::mesh::TriangleMesh;
use crate::scalar::wavelength;
use crate::scene::{LookGeometry, RadarPose, Vec3};

const SELF_HIT_EPS: f64 = 1e-7;
const MAX_RAYS: usize = 40_000_000;

/// Which side of a multi-bounce path carries the extra reflection when the
/// bounce count does not split evenly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConnectionSplit {
    #[default]
    ForwardHeavy,
    BackwardHeavy,
}

impl ConnectionSplit {
    /// Backward reflections used for a path with `bounces` total reflections.
    pub fn backward_depth(self, bounces: usize) -> usize {
        let extra = bounces - 1;
        match self {
            ConnectionSplit::ForwardHeavy => extra / 2,
            ConnectionSplit::BackwardHeavy => extra - extra / 2,
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            ConnectionSplit::ForwardHeavy => ConnectionSplit::BackwardHeavy,
            ConnectionSplit::BackwardHeavy => ConnectionSplit::ForwardHeavy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub max_bounce: usize,
    /// Ray tubes per wavelength along each axis of the launch plane.
    pub rays_per_wavelength: f64,
    /// Frequency at which the physical-optics amplitudes are evaluated, Hz.
    pub frequency: f64,
    /// Rays whose accumulated reflection gain drops below this level stop.
    pub min_gain_db: f64,
    pub split: ConnectionSplit,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self {
            max_bounce: 3,
            rays_per_wavelength: 2.0,
            frequency: 77.0e9,
            min_gain_db: -40.0,
            split: ConnectionSplit::ForwardHeavy,
        }
    }
}

/// One source-to-observer scattering path.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    /// Launch point on the source reference plane.
    pub entry: Vec3,
    /// Reflection points in propagation order (forward, join, backward).
    pub bounce_points: Vec<Vec3>,
    /// Arrival point on the observer reference plane.
    pub exit: Vec3,
    /// Total length from `entry` to `exit`, meters.
    pub path_length: f64,
    /// Scattering amplitude in sqrt(m^2) units at the trace frequency.
    pub amplitude: Complex64,
    /// |product of reflection coefficients| along the path.
    pub chain_gain: f64,
    pub forward_bounces: usize,
    pub backward_bounces: usize,
    /// Last facet before the path leaves toward the observer.
    pub terminal_facet: usize,
}

impl RayPath {
    pub fn bounces(&self) -> usize {
        self.bounce_points.len()
    }

    pub fn segment_length_sum(&self) -> f64 {
        let mut pts = Vec::with_capacity(self.bounce_points.len() + 2);
        pts.push(self.entry);
        pts.extend_from_slice(&self.bounce_points);
        pts.push(self.exit);
        pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Result of one trace.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub paths: Vec<RayPath>,
    /// Round-trip length from the reference planes to the mesh origin; path
    /// delays are reported relative to it.
    pub reference_length: f64,
    pub rays_launched: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl Trace {
    /// Extra length of a path beyond the round trip to the mesh origin.
    pub fn excess_length(&self, path: &RayPath) -> f64 {
        path.path_length - self.reference_length
    }
}

/// A mesh with its acceleration structure, reusable across looks.
#[derive(Debug, Clone)]
pub struct ScatteringModel {
    mesh: TriangleMesh,
    bvh: Bvh,
    open_edges: usize,
}

impl ScatteringModel {
    pub fn new(mesh: TriangleMesh) -> Result<Self> {
        mesh.validate()?;
        let bvh = Bvh::build(&mesh);
        let open_edges = mesh.open_edge_count();
        Ok(Self { mesh, bvh, open_edges })
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }
}

/// Forward hit of one ray on one facet.
#[derive(Debug, Clone)]
struct HitRecord {
    depth: usize,
    facet: usize,
    point: Vec3,
    dir: Vec3,
    edge_u: Vec3,
    edge_v: Vec3,
    /// Reflection gain accumulated before this facet.
    gain: Complex64,
    /// Length from the launch point to `point`.
    length: f64,
    origin: Vec3,
    points_before: Vec<Vec3>,
}

struct Launch {
    origins: Vec<Vec3>,
    edge_u: Vec3,
    edge_v: Vec3,
    plane: f64,
}

fn launch_grid(mesh: &TriangleMesh, dir: &Vec3, spacing: f64) -> Result<Launch> {
    let horizontal = dir.cross(&Vec3::z());
    let t1 = if horizontal.norm() > 1e-9 { horizontal.normalize() } else { Vec3::x() };
    let t2 = t1.cross(dir).normalize();
    let (mut umin, mut umax, mut vmin, mut vmax, mut smin) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for p in &mesh.vertices {
        let (u, v, s) = (t1.dot(p), t2.dot(p), dir.dot(p));
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
        smin = smin.min(s);
    }
    // cell-centred samples covering the silhouette bounds
    let nu = ((umax - umin) / spacing).ceil().max(1.0) as usize;
    let nv = ((vmax - vmin) / spacing).ceil().max(1.0) as usize;
    if nu.saturating_mul(nv) > MAX_RAYS {
        return Err(SimError::InvalidParameter(format!(
            "ray grid of {nu}x{nv} exceeds the {MAX_RAYS} ray limit; lower the ray density"
        )));
    }
    let plane = smin - 1.0;
    let (uc, vc) = ((umin + umax) / 2.0, (vmin + vmax) / 2.0);
    let mut origins = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        let v = vc + (j as f64 - (nv - 1) as f64 / 2.0) * spacing;
        for i in 0..nu {
            let u = uc + (i as f64 - (nu - 1) as f64 / 2.0) * spacing;
            origins.push(t1 * u + t2 * v + dir * plane);
        }
    }
    Ok(Launch { origins, edge_u: t1 * spacing, edge_v: t2 * spacing, plane })
}

fn reflect(v: &Vec3, n: &Vec3) -> Vec3 {
    v - n * (2.0 * v.dot(n))
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0
    } else {
        x.sin() / x
    }
}

fn dir_key(d: &Vec3) -> [i64; 3] {
    [(d.x * 1e9).round() as i64, (d.y * 1e9).round() as i64, (d.z * 1e9).round() as i64]
}

fn trace_forward(
    model: &ScatteringModel,
    origin: Vec3,
    dir: Vec3,
    launch: &Launch,
    max_depth: usize,
    min_gain: f64,
) -> Vec<HitRecord> {
    let mesh = &model.mesh;
    let mut out = Vec::new();
    let (mut o, mut d, mut eu, mut ev) = (origin, dir, launch.edge_u, launch.edge_v);
    let mut gain = Complex64::new(1.0, 0.0);
    let mut length = 0.0;
    let mut points = Vec::new();
    let mut t_min = 0.0;
    for depth in 0..max_depth {
        let Some(hit) = model.bvh.intersect(mesh, &o, &d, t_min, f64::INFINITY) else {
            break;
        };
        length += hit.distance;
        out.push(HitRecord {
            depth,
            facet: hit.facet,
            point: hit.point,
            dir: d,
            edge_u: eu,
            edge_v: ev,
            gain,
            length,
            origin,
            points_before: points.clone(),
        });
        let n = mesh.normal(hit.facet);
        gain *= mesh.reflectivity[hit.facet];
        if gain.norm() < min_gain {
            break;
        }
        d = reflect(&d, &n).normalize();
        eu = reflect(&eu, &n);
        ev = reflect(&ev, &n);
        points.push(hit.point);
        o = hit.point;
        t_min = SELF_HIT_EPS;
    }
    out
}

struct BackwardLeg {
    points: Vec<Vec3>,
    exit: Vec3,
    length: f64,
    gain: Complex64,
    last_facet: Option<usize>,
}

/// Retraces a backward leg from `start` along `dir` through exactly `bounces`
/// reflections; it must then leave along `exit_dir` unobstructed.
fn retrace_backward(
    model: &ScatteringModel,
    start: Vec3,
    dir: Vec3,
    bounces: usize,
    exit_dir: &Vec3,
    plane: f64,
) -> Option<BackwardLeg> {
    let mesh = &model.mesh;
    let (mut o, mut d) = (start, dir);
    let mut points = Vec::with_capacity(bounces);
    let mut gain = Complex64::new(1.0, 0.0);
    let mut length = 0.0;
    let mut last_facet = None;
    for _ in 0..bounces {
        let hit = model.bvh.intersect(mesh, &o, &d, SELF_HIT_EPS, f64::INFINITY)?;
        let n = mesh.normal(hit.facet);
        length += hit.distance;
        gain *= mesh.reflectivity[hit.facet];
        d = reflect(&d, &n).normalize();
        points.push(hit.point);
        o = hit.point;
        last_facet = Some(hit.facet);
    }
    if d.dot(exit_dir) < 1.0 - 1e-9 {
        return None;
    }
    if model.bvh.occluded(mesh, &o, &d, SELF_HIT_EPS) {
        return None;
    }
    // exit_dir = -incident, so the observer plane sits at incident-coordinate `plane`.
    let back = -exit_dir.dot(&o) - plane;
    let exit = o + d * back;
    length += back;
    Some(BackwardLeg { points, exit, length, gain, last_facet })
}

/// Traces a monostatic far-field look.
///
/// `incident` is the unit propagation direction of the illuminating plane wave
/// in mesh coordinates (radar toward target).
pub fn trace_bidirectional(
    model: &ScatteringModel,
    incident: &Vec3,
    params: &TraceParams,
) -> Result<Trace> {
    if model.mesh.is_empty() {
        return Err(SimError::InvalidMesh("mesh has no triangles".into()));
    }
    if params.max_bounce < 1 {
        return Err(SimError::InvalidParameter("max_bounce must be at least 1".into()));
    }
    if !(params.rays_per_wavelength > 0.0) || !(params.frequency > 0.0) {
        return Err(SimError::InvalidParameter(
            "ray density and frequency must be positive".into(),
        ));
    }
    let d0 = incident.normalize();
    let lambda = wavelength(params.frequency);
    let k = 2.0 * std::f64::consts::PI / lambda;
    let spacing = lambda / params.rays_per_wavelength;
    let launch = launch_grid(&model.mesh, &d0, spacing)?;
    let min_gain = 10f64.powf(params.min_gain_db / 20.0);
    let mut diagnostics = Vec::new();
    if params.max_bounce > 1 && model.open_edges > 0 {
        log::warn!("tracing open mesh ({} open edges) with multiple bounces", model.open_edges);
        diagnostics.push(Diagnostic::OpenMeshMultiBounce { open_edges: model.open_edges });
    }

    // Deepest forward hit needed: every split leaves at least zero backward bounces.
    let max_forward = (1..=params.max_bounce)
        .map(|n| n - 1 - params.split.backward_depth(n))
        .max()
        .unwrap_or(0);
    let max_backward = (1..=params.max_bounce)
        .map(|n| params.split.backward_depth(n))
        .max()
        .unwrap_or(0);
    let trace_depth = max_forward.max(max_backward) + 1;

    let hits: Vec<Vec<HitRecord>> = launch
        .origins
        .par_iter()
        .map(|o| trace_forward(model, *o, d0, &launch, trace_depth, min_gain))
        .collect();

    // Backward bundles: distinct arrival directions per (facet, depth >= 1).
    let mut bundles: BTreeMap<(usize, usize), BTreeMap<[i64; 3], Vec3>> = BTreeMap::new();
    for h in hits.iter().flatten().filter(|h| h.depth >= 1 && h.depth <= max_backward) {
        bundles.entry((h.facet, h.depth)).or_default().entry(dir_key(&h.dir)).or_insert(h.dir);
    }

    let exit_dir = -d0;
    let scale = (4.0 * std::f64::consts::PI).sqrt() / lambda;

    let mut exact = vec![false; model.mesh.triangles.len()];
    for h in hits.iter().filter_map(|r| r.first()) {
        exact[h.facet] = true;
    }
    let exact: Vec<bool> = exact
        .par_iter()
        .enumerate()
        .map(|(f, &hit)| hit && fully_visible(model, f, &exit_dir))
        .collect();
    let mut facet_paths: Vec<RayPath> = exact
        .par_iter()
        .enumerate()
        .filter(|(_, &e)| e)
        .map(|(f, _)| facet_path(model, f, &d0, launch.plane, k, scale))
        .collect();
    let paths: Vec<Vec<RayPath>> = hits
        .par_iter()
        .map(|ray| {
            let mut out = Vec::new();
            for h in ray {
                for kb in 0..=max_backward {
                    if h.depth == 0 && kb == 0 && exact[h.facet] {
                        continue;
                    }
                    let n = h.depth + kb + 1;
                    if n > params.max_bounce || params.split.backward_depth(n) != kb {
                        continue;
                    }
                    connect(model, h, kb, &bundles, &exit_dir, &launch, k, scale, &mut out);
                }
            }
            out
        })
        .collect();

    facet_paths.extend(paths.into_iter().flatten());
    let paths = facet_paths;
    Ok(Trace {
        paths,
        reference_length: -2.0 * launch.plane,
        rays_launched: launch.origins.len(),
        diagnostics,
    })
}

/// Joins forward hit `h` to the backward bundles reaching its facet after `kb`
/// reflections, pushing one path per verified backward leg.
#[allow(clippy::too_many_arguments)]
fn connect(
    model: &ScatteringModel,
    h: &HitRecord,
    kb: usize,
    bundles: &BTreeMap<(usize, usize), BTreeMap<[i64; 3], Vec3>>,
    exit_dir: &Vec3,
    launch: &Launch,
    k: f64,
    scale: f64,
    out: &mut Vec<RayPath>,
) {
    let mesh = &model.mesh;
    let mut normal = mesh.normal(h.facet);
    if normal.dot(&h.dir) > 0.0 {
        normal = -normal;
    }
    let candidates: Vec<Vec3> = if kb == 0 {
        vec![*exit_dir]
    } else {
        bundles
            .get(&(h.facet, kb))
            .map(|b| b.values().map(|e| -e).collect())
            .unwrap_or_default()
    };
    for scatter in candidates {
        if normal.dot(&scatter) <= 0.0 {
            continue;
        }
        let Some(leg) = retrace_backward(model, h.point, scatter, kb, exit_dir, launch.plane) else {
            continue;
        };
        // Forward tube footprint on the facet plane, and the PO integral over it.
        let cos_i = normal.dot(&h.dir);
        let project = |e: &Vec3| e - h.dir * (normal.dot(e) / cos_i);
        let (pu, pv) = (project(&h.edge_u), project(&h.edge_v));
        let q = h.dir - scatter;
        let footprint =
            pu.cross(&pv).norm() * sinc(0.5 * k * q.dot(&pu)) * sinc(0.5 * k * q.dot(&pv));
        let obliquity = 0.5 * normal.dot(&(scatter - h.dir));
        let gain = h.gain * mesh.reflectivity[h.facet] * leg.gain;
        let mut bounce_points = h.points_before.clone();
        bounce_points.push(h.point);
        bounce_points.extend_from_slice(&leg.points);
        out.push(RayPath {
            entry: h.origin,
            bounce_points,
            exit: leg.exit,
            path_length: h.length + leg.length,
            amplitude: gain * (scale * obliquity * footprint),
            chain_gain: gain.norm(),
            forward_bounces: h.depth,
            backward_bounces: kb,
            terminal_facet: leg.last_facet.unwrap_or(h.facet),
        });
    }
}

/// True when the centroid and (slightly inset) corners of `facet` all see the
/// radar unobstructed.
fn fully_visible(model: &ScatteringModel, facet: usize, toward: &Vec3) -> bool {
    let mesh = &model.mesh;
    let corners = mesh.corners(facet);
    let centre = (corners[0] + corners[1] + corners[2]) / 3.0;
    let mut n = mesh.normal(facet);
    if n.dot(toward) < 0.0 {
        n = -n;
    }
    if n.dot(toward) < 1e-6 {
        return false;
    }
    let offset = n * 1e-6;
    std::iter::once(centre)
        .chain(corners.iter().map(|c| centre + (c - centre) * 0.95))
        .all(|p| !model.bvh.occluded(mesh, &(p + offset), toward, SELF_HIT_EPS))
}

/// `(e^z - 1) / z`, accurate near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `int_T exp(-j k q.(r - centre)) dA` over a triangle, closed form.
fn triangle_integral(corners: &[Vec3; 3], centre: &Vec3, k: f64, q: &Vec3, area: f64) -> Complex64 {
    let t: Vec<Complex64> =
        corners.iter().map(|c| Complex64::new(0.0, -k * q.dot(&(c - centre)))).collect();
    // order so that the widest pair is divided last
    let pairs = [(0usize, 1usize, 2usize), (1, 0, 2), (2, 0, 1)];
    let (a, b, c) = pairs
        .iter()
        .copied()
        .max_by(|x, y| (t[x.1] - t[x.2]).norm().total_cmp(&(t[y.1] - t[y.2]).norm()))
        .expect("three pairs");
    let (d1, d2) = (t[b] - t[a], t[c] - t[a]);
    let dd = if (d1 - d2).norm() < 1e-4 {
        // all three phases nearly equal
        Complex64::new(0.5, 0.0) + (d1 + d2) / 6.0 + (d1 * d1 + d1 * d2 + d2 * d2) / 24.0
    } else {
        (phi1(d1) - phi1(d2)) / (d1 - d2)
    };
    t[a].exp() * dd * (2.0 * area)
}

fn facet_path(model: &ScatteringModel, facet: usize, d0: &Vec3, plane: f64, k: f64, scale: f64) -> RayPath {
    let mesh = &model.mesh;
    let corners = mesh.corners(facet);
    let centre = (corners[0] + corners[1] + corners[2]) / 3.0;
    let to_plane = d0.dot(&centre) - plane;
    let obliquity = mesh.normal(facet).dot(d0).abs();
    let integral = triangle_integral(&corners, &centre, k, &(d0 * 2.0), mesh.area(facet));
    let gain = mesh.reflectivity[facet];
    let entry = centre - d0 * to_plane;
    RayPath {
        entry,
        bounce_points: vec![centre],
        exit: entry,
        path_length: 2.0 * to_plane,
        amplitude: gain * scale * obliquity * integral,
        chain_gain: gain.norm(),
        forward_bounces: 0,
        backward_bounces: 0,
        terminal_facet: facet,
    }
}

/// Incident propagation direction in mesh coordinates for a vehicle whose
/// mesh front (-Y) is turned to `heading`.
pub fn incident_direction(look: &LookGeometry, heading: &Vec3) -> Vec3 {
    // rotation about Z taking local -Y onto the heading
    let angle = (-heading.x).atan2(-heading.y);
    let (s, c) = angle.sin_cos();
    let u = look.line_of_sight;
    // inverse rotation (by -angle)
    Vec3::new(c * u.x + s * u.y, -s * u.x + c * u.y, u.z)
}

/// Traces a vehicle as seen from the radar; targets outside the forward
/// half-space of the radar yield an empty trace.
pub fn trace_look(
    model: &ScatteringModel,
    look: &LookGeometry,
    radar: &RadarPose,
    heading: &Vec3,
    params: &TraceParams,
) -> Result<Trace> {
    if look.line_of_sight.dot(&radar.boresight) <= 0.0 {
        return Ok(Trace { diagnostics: vec![Diagnostic::EmptyResponse], ..Trace::default() });
    }
    trace_bidirectional(model, &incident_direction(look, heading), params)
}
