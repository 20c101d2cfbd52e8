//! Intersection geometry: lanes, the pole-mounted radar, and straight-lane
//! vehicle tracks.
//!
//! World frame: origin at the ground projection of the radar, X across the
//! lanes, Y along the monitored approach, Z up.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::rcs::VehicleClass;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneLayout {
    /// Extent of the intersection along Y, meters.
    pub intersection_width: f64,
    pub lane_width: f64,
    /// Lane centers along X, ordered; lane `k` (1-based) is `lane_center_x[k - 1]`.
    pub lane_center_x: Vec<f64>,
}

/// Three-lane approach monitored from a 6 m pole.
pub fn default_intersection() -> LaneLayout {
    LaneLayout {
        intersection_width: 22.5,
        lane_width: 3.75,
        lane_center_x: vec![2.0, 5.75, 9.5],
    }
}

impl Default for LaneLayout {
    fn default() -> Self {
        default_intersection()
    }
}

impl LaneLayout {
    pub fn validate(&self) -> Result<()> {
        if !(self.lane_width > 0.0) {
            return Err(SimError::InvalidParameter("lane_width must be positive".into()));
        }
        if self.lane_center_x.is_empty() {
            return Err(SimError::InvalidParameter("layout has no lanes".into()));
        }
        if self.lane_center_x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::InvalidParameter(
                "lane centers must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn lane_count(&self) -> usize {
        self.lane_center_x.len()
    }

    /// Center of a 1-based lane number.
    pub fn lane_center(&self, lane: usize) -> Result<f64> {
        if lane == 0 || lane > self.lane_center_x.len() {
            return Err(SimError::InvalidLane { lane, lanes: self.lane_center_x.len() });
        }
        Ok(self.lane_center_x[lane - 1])
    }

    /// 1-based lane whose center is nearest to `x`.
    pub fn nearest_lane(&self, x: f64) -> usize {
        self.lane_center_x
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
            .map(|(i, _)| i + 1)
            .unwrap_or(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarPose {
    pub position: Vec3,
    /// Unit boresight vector.
    pub boresight: Vec3,
}

impl RadarPose {
    pub const DEFAULT_HEIGHT: f64 = 6.0;
    pub const DEFAULT_DOWNTILT_DEG: f64 = 5.0;

    /// Radar above the origin looking down the +Y approach with the given downtilt.
    pub fn new(height: f64, downtilt_deg: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(SimError::InvalidParameter("radar height must be positive".into()));
        }
        let tilt = downtilt_deg.to_radians();
        Ok(Self {
            position: Vec3::new(0.0, 0.0, height),
            boresight: Vec3::new(0.0, tilt.cos(), -tilt.sin()).normalize(),
        })
    }

    pub fn height(&self) -> f64 {
        self.position.z
    }

    /// Azimuth of the boresight in the ground plane, measured from +Y toward +X.
    pub fn boresight_azimuth(&self) -> f64 {
        self.boresight.x.atan2(self.boresight.y)
    }
}

impl Default for RadarPose {
    fn default() -> Self {
        Self::new(Self::DEFAULT_HEIGHT, Self::DEFAULT_DOWNTILT_DEG).expect("valid default pose")
    }
}

/// A vehicle on a straight lane at constant velocity.
///
/// The tracked point is the ground projection of the vehicle's leading face
/// (the face toward its heading), which is where the radar sees the vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetTrack {
    pub target_id: String,
    pub class: VehicleClass,
    /// 1-based lane number.
    pub lane: usize,
    pub initial_range_y: f64,
    /// Ground speed, m/s, along `heading`.
    pub speed: f64,
    /// Unit heading in the ground plane.
    pub heading: Vec3,
    /// When set, the target is an ideal point scatterer of this RCS (m^2) at
    /// the tracked point instead of the class mesh.
    pub point_rcs: Option<f64>,
}

impl TargetTrack {
    /// Track driving toward the radar (heading -Y).
    pub fn approaching(
        id: impl Into<String>,
        class: VehicleClass,
        lane: usize,
        initial_range_y: f64,
        speed: f64,
    ) -> Self {
        Self {
            target_id: id.into(),
            class,
            lane,
            initial_range_y,
            speed,
            heading: Vec3::new(0.0, -1.0, 0.0),
            point_rcs: None,
        }
    }

    pub fn with_point_rcs(mut self, rcs: f64) -> Self {
        self.point_rcs = Some(rcs);
        self
    }

    /// Approaching track placed so that its slant range from the radar is
    /// `distance` at t = 0.
    pub fn approaching_at_distance(
        id: impl Into<String>,
        class: VehicleClass,
        layout: &LaneLayout,
        radar: &RadarPose,
        lane: usize,
        distance: f64,
        speed: f64,
    ) -> Result<Self> {
        let x = layout.lane_center(lane)?;
        let dx = x - radar.position.x;
        let dz = radar.position.z;
        let ground_sq = distance * distance - dx * dx - dz * dz;
        if ground_sq <= 0.0 {
            return Err(SimError::DegenerateGeometry(
                "distance shorter than the lateral offset and radar height",
            ));
        }
        Ok(Self::approaching(id, class, lane, radar.position.y + ground_sq.sqrt(), speed))
    }

    pub fn validate(&self, layout: &LaneLayout) -> Result<()> {
        layout.lane_center(self.lane)?;
        if !(self.speed >= 0.0) {
            return Err(SimError::InvalidParameter(format!(
                "target `{}`: speed must be non-negative",
                self.target_id
            )));
        }
        if self.point_rcs.is_some_and(|s| !(s >= 0.0) || !s.is_finite()) {
            return Err(SimError::InvalidParameter(format!(
                "target `{}`: point RCS must be finite and non-negative",
                self.target_id
            )));
        }
        if (self.heading.norm() - 1.0).abs() > 1e-9 || self.heading.z != 0.0 {
            return Err(SimError::InvalidParameter(format!(
                "target `{}`: heading must be a ground-plane unit vector",
                self.target_id
            )));
        }
        Ok(())
    }

    pub fn initial_position(&self, layout: &LaneLayout) -> Result<Vec3> {
        Ok(Vec3::new(layout.lane_center(self.lane)?, self.initial_range_y, 0.0))
    }

    pub fn velocity(&self) -> Vec3 {
        self.heading * self.speed
    }

    /// Position and velocity at time `t` (seconds since frame start).
    pub fn pose_at(&self, layout: &LaneLayout, t: f64) -> Result<(Vec3, Vec3)> {
        if !(t >= 0.0) {
            return Err(SimError::InvalidParameter("time must be non-negative".into()));
        }
        let v = self.velocity();
        Ok((self.initial_position(layout)? + v * t, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookGeometry {
    pub range: f64,
    /// Ground-plane azimuth from boresight, positive toward +X.
    pub azimuth: f64,
    /// Elevation above the horizontal (negative when looking down).
    pub elevation: f64,
    /// Positive when approaching.
    pub radial_velocity: f64,
    /// Unit vector from the radar to the target.
    pub line_of_sight: Vec3,
}

pub fn look_geometry(radar: &RadarPose, position: &Vec3, velocity: &Vec3) -> Result<LookGeometry> {
    let los = position - radar.position;
    let range = los.norm();
    if !(range > 0.0) {
        return Err(SimError::DegenerateGeometry("target coincides with the radar"));
    }
    let u = los / range;
    let ground = (los.x * los.x + los.y * los.y).sqrt();
    Ok(LookGeometry {
        range,
        azimuth: los.x.atan2(los.y) - radar.boresight_azimuth(),
        elevation: los.z.atan2(ground),
        radial_velocity: -velocity.dot(&u),
        line_of_sight: u,
    })
}

/// Lanes, radar and the tracks inside one simulation run.
#[derive(Debug, Clone)]
pub struct Scene {
    pub layout: LaneLayout,
    pub radar: RadarPose,
    pub targets: Vec<TargetTrack>,
}

impl Scene {
    pub fn new(layout: LaneLayout, radar: RadarPose, targets: Vec<TargetTrack>) -> Result<Self> {
        layout.validate()?;
        for t in &targets {
            t.validate(&layout)?;
        }
        Ok(Self { layout, radar, targets })
    }

    pub fn empty() -> Self {
        Self { layout: default_intersection(), radar: RadarPose::default(), targets: Vec::new() }
    }

    pub fn target(&self, id: &str) -> Result<&TargetTrack> {
        self.targets
            .iter()
            .find(|t| t.target_id == id)
            .ok_or_else(|| SimError::UnknownTarget(id.to_string()))
    }

    pub fn target_pose_at(&self, id: &str, t: f64) -> Result<(Vec3, Vec3)> {
        self.target(id)?.pose_at(&self.layout, t)
    }

    pub fn look_at(&self, track: &TargetTrack, t: f64) -> Result<LookGeometry> {
        let (p, v) = track.pose_at(&self.layout, t)?;
        look_geometry(&self.radar, &p, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car(lane: usize, y0: f64, v: f64) -> TargetTrack {
        TargetTrack::approaching("t1", VehicleClass::Car, lane, y0, v)
    }

    #[test]
    fn default_layout_values() {
        let l = default_intersection();
        assert_eq!(l.lane_center_x, vec![2.0, 5.75, 9.5]);
        assert_eq!(l.intersection_width, 22.5);
        assert_eq!(l.lane_width, 3.75);
        l.validate().unwrap();
    }

    #[test]
    fn pose_kinematics() {
        let scene = Scene::new(default_intersection(), RadarPose::default(), vec![car(1, 40.0, 10.0)])
            .unwrap();
        let (p0, _) = scene.target_pose_at("t1", 0.0).unwrap();
        assert_eq!((p0.x, p0.y), (2.0, 40.0));
        let (p1, v) = scene.target_pose_at("t1", 1.0).unwrap();
        assert!((p1.y - 30.0).abs() < 1e-12);
        assert_eq!(v, Vec3::new(0.0, -10.0, 0.0));
        assert!(matches!(scene.target_pose_at("nope", 0.0), Err(SimError::UnknownTarget(_))));
        assert!(scene.target_pose_at("t1", -1.0).is_err());
    }

    #[test]
    fn look_examples() {
        let radar = RadarPose::default();
        let zero = Vec3::zeros();
        let on_axis = look_geometry(&radar, &Vec3::new(0.0, 40.0, 0.0), &zero).unwrap();
        assert_eq!(on_axis.azimuth, 0.0);
        assert_eq!(on_axis.radial_velocity, 0.0);

        let g = look_geometry(&radar, &Vec3::new(2.0, 40.0, 0.0), &zero).unwrap();
        assert!((g.azimuth.to_degrees() - 2.862405).abs() < 1e-5);
        assert!((g.range - 1640f64.sqrt()).abs() < 1e-12);
        assert!((g.range - 40.497).abs() < 1e-3);
        assert!(g.elevation < 0.0);

        let err = look_geometry(&radar, &radar.position, &zero);
        assert!(matches!(err, Err(SimError::DegenerateGeometry(_))));
    }

    #[test]
    fn approaching_target_has_positive_radial_velocity() {
        let radar = RadarPose::default();
        let g = look_geometry(&radar, &Vec3::new(2.0, 40.0, 0.0), &Vec3::new(0.0, -10.0, 0.0))
            .unwrap();
        assert!((g.radial_velocity - 400.0 / 1640f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn placement_by_slant_range() {
        let layout = default_intersection();
        let radar = RadarPose::default();
        let t = TargetTrack::approaching_at_distance("a", VehicleClass::Car, &layout, &radar, 3, 40.0, 5.0)
            .unwrap();
        let g = look_geometry(&radar, &t.initial_position(&layout).unwrap(), &Vec3::zeros()).unwrap();
        assert!((g.range - 40.0).abs() < 1e-12);
        assert!(t.validate(&layout).is_ok());
        assert!(TargetTrack::approaching_at_distance("b", VehicleClass::Car, &layout, &radar, 4, 40.0, 5.0)
            .is_err());
    }

    #[test]
    fn boresight_is_unit() {
        let r = RadarPose::new(6.0, 12.0).unwrap();
        assert!((r.boresight.norm() - 1.0).abs() < 1e-12);
        assert!(RadarPose::new(0.0, 5.0).is_err());
    }

    #[test]
    fn lane_validation() {
        let mut l = default_intersection();
        assert!(l.lane_center(0).is_err());
        assert_eq!(l.nearest_lane(6.3), 2);
        l.lane_center_x = vec![2.0, 2.0];
        assert!(l.validate().is_err());
    }
}
