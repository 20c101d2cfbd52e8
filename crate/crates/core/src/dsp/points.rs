use crate::diagnostics::Diagnostic;
use crate::scene::RadarPose;

/// One detected scatterer after angle estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub range: f64,
    /// Positive when approaching.
    pub radial_velocity: f64,
    /// Ground-plane azimuth from boresight, radians, positive toward +X.
    pub azimuth: f64,
    /// CFAR cell-to-training ratio, dB.
    pub snr_db: f64,
    /// RDM cell power, dB.
    pub power_db: f64,
    /// Index of the cluster the detection came from.
    pub cluster: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v: f64,
    pub intensity: f64,
    pub cluster: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ground-plane centroid of one cluster's points.
    pub fn centroid(&self, cluster: usize) -> Option<(f64, f64)> {
        let pts: Vec<&Point> = self.points.iter().filter(|p| p.cluster == cluster).collect();
        if pts.is_empty() {
            return None;
        }
        let n = pts.len() as f64;
        Some((pts.iter().map(|p| p.x).sum::<f64>() / n, pts.iter().map(|p| p.y).sum::<f64>() / n))
    }
}

/// Projects detections onto the road plane through the radar's height:
/// ground range `g = sqrt(r^2 - h^2)`, `x = g sin(az + az_b)`,
/// `y = g cos(az + az_b)`, `z = 0`. Detections at or inside the radar height
/// are dropped.
pub fn to_point_cloud(detections: &[Detection], radar: &RadarPose) -> (PointCloud, Vec<Diagnostic>) {
    let h = radar.height();
    let (x0, y0) = (radar.position.x, radar.position.y);
    let mut cloud = PointCloud::default();
    let mut diagnostics = Vec::new();
    for d in detections {
        if !(d.range > h) {
            diagnostics.push(Diagnostic::PointBelowRadar { range: d.range });
            continue;
        }
        let g = (d.range * d.range - h * h).sqrt();
        let a = d.azimuth + radar.boresight_azimuth();
        cloud.points.push(Point {
            x: x0 + g * a.sin(),
            y: y0 + g * a.cos(),
            z: 0.0,
            v: d.radial_velocity,
            intensity: d.power_db,
            cluster: d.cluster,
        });
    }
    (cloud, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(range: f64, azimuth: f64) -> Detection {
        Detection {
            range_bin: 0,
            doppler_bin: 0,
            range,
            radial_velocity: 3.0,
            azimuth,
            snr_db: 20.0,
            power_db: -80.0,
            cluster: 0,
        }
    }

    #[test]
    fn projection_examples() {
        let radar = RadarPose::default();
        let (c, d) = to_point_cloud(&[det(40.497, 2.862f64.to_radians()), det(30.0, 0.0), det(6.0, 0.0)], &radar);
        assert_eq!(c.len(), 2);
        assert!((c.points[0].x - 2.0).abs() < 2e-3 && (c.points[0].y - 40.0).abs() < 2e-3);
        assert_eq!(c.points[1].x, 0.0);
        assert_eq!(c.points[0].v, 3.0);
        assert_eq!(d, vec![Diagnostic::PointBelowRadar { range: 6.0 }]);
        let g30 = (900.0f64 - 36.0).sqrt();
        let want = (c.points[0].y + g30) / 2.0;
        assert!((c.centroid(0).unwrap().1 - want).abs() < 1e-12);
        assert!(c.centroid(1).is_none());
    }
}
