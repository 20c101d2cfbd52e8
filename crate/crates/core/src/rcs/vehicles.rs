//! Primitive-composite vehicle meshes.
//!
//! Local frame: the leading face lies in the plane y = 0 facing -Y, the body
//! extends toward +Y, X is centred on the vehicle axis and z = 0 is the road.
//! The origin is therefore the ground projection of the leading face centre.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rcs::mesh::TriangleMesh;
use crate::scene::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Car,
    Bus,
    Truck,
    Motorcycle,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 4] =
        [VehicleClass::Car, VehicleClass::Bus, VehicleClass::Truck, VehicleClass::Motorcycle];

    pub fn name(self) -> &'static str {
        match self {
            VehicleClass::Car => "car",
            VehicleClass::Bus => "bus",
            VehicleClass::Truck => "truck",
            VehicleClass::Motorcycle => "motorcycle",
        }
    }

    /// Bounding box (length, width, height) in meters.
    pub fn dimensions(self) -> (f64, f64, f64) {
        match self {
            VehicleClass::Car => (5.0, 2.0, 1.8),
            VehicleClass::Bus => (12.0, 2.5, 3.0),
            VehicleClass::Truck => (8.0, 2.5, 3.5),
            VehicleClass::Motorcycle => (2.1, 0.8, 1.4),
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VehicleClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "car" => Ok(VehicleClass::Car),
            "bus" => Ok(VehicleClass::Bus),
            "truck" => Ok(VehicleClass::Truck),
            "motorcycle" => Ok(VehicleClass::Motorcycle),
            other => Err(format!("unknown vehicle class `{other}`")),
        }
    }
}

/// Facets per 45 degrees of rounding; keeps facets well inside a Fresnel
/// zone for the radii used below.
const ROUNDING_STEPS: usize = 8;

fn cuboid(x: (f64, f64), y: (f64, f64), z: (f64, f64)) -> TriangleMesh {
    TriangleMesh::cuboid(Vec3::new(x.0, y.0, z.0), Vec3::new(x.1, y.1, z.1))
}

fn rounded(x: (f64, f64), y: (f64, f64), z: (f64, f64), radius: f64) -> TriangleMesh {
    TriangleMesh::rounded_box(Vec3::new(x.0, y.0, z.0), Vec3::new(x.1, y.1, z.1), radius, ROUNDING_STEPS)
}

/// Sides of the polygon approximating a wheel.
const WHEEL_SIDES: usize = 16;

/// Wheel standing on the road: a cylinder along X over `[x0, x1]`.
fn wheel(x0: f64, x1: f64, y_center: f64, radius: f64) -> TriangleMesh {
    let profile: Vec<(f64, f64)> = (0..WHEEL_SIDES)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / WHEEL_SIDES as f64;
            // snap the contact point onto the road
            let z = radius * (1.0 + a.sin());
            (y_center + radius * a.cos(), if z.abs() < 1e-12 { 0.0 } else { z })
        })
        .collect();
    TriangleMesh::prism_x(&profile, x0, x1)
}

/// Pair of wheels mirrored about the vehicle axis.
fn axle(mesh: &mut TriangleMesh, inner: f64, outer: f64, y_center: f64, radius: f64) {
    mesh.append(&wheel(-outer, -inner, y_center, radius));
    mesh.append(&wheel(inner, outer, y_center, radius));
}

/// Closed mesh for one vehicle class; every part is a closed convex solid.
///
/// Body shells have rounded edges: sheet metal is curved, and without that a
/// radar looking down from a pole sees almost no specular surface on a box.
pub fn builtin_vehicle_mesh(class: VehicleClass) -> TriangleMesh {
    let mut m = TriangleMesh::default();
    match class {
        VehicleClass::Car => {
            m.append(&rounded((-0.9, 0.9), (0.0, 5.0), (0.3, 1.0), 0.3));
            // cabin: raked windshield and rear window
            let cabin = [(1.6, 1.0), (4.6, 1.0), (4.2, 1.8), (2.5, 1.8)];
            m.append(&TriangleMesh::prism_x(&cabin, -0.85, 0.85));
            // tyres stand proud of the sills, as seen through open wheel arches
            axle(&mut m, 0.78, 1.0, 1.0, 0.33);
            axle(&mut m, 0.78, 1.0, 3.9, 0.33);
        }
        VehicleClass::Bus => {
            m.append(&rounded((-1.25, 1.25), (0.0, 12.0), (0.35, 3.0), 0.3));
            axle(&mut m, 0.9, 1.2, 2.1, 0.5);
            axle(&mut m, 0.9, 1.2, 9.3, 0.5);
        }
        VehicleClass::Truck => {
            m.append(&rounded((-1.2, 1.2), (0.0, 2.2), (0.5, 2.9), 0.3));
            m.append(&rounded((-1.25, 1.25), (2.5, 8.0), (0.9, 3.5), 0.08));
            axle(&mut m, 0.9, 1.2, 1.1, 0.5);
            axle(&mut m, 0.9, 1.2, 5.5, 0.5);
            axle(&mut m, 0.9, 1.2, 6.9, 0.5);
        }
        VehicleClass::Motorcycle => {
            m.append(&wheel(-0.06, 0.06, 0.31, 0.31));
            m.append(&wheel(-0.06, 0.06, 1.79, 0.31));
            let body = [(0.4, 0.45), (1.7, 0.45), (1.6, 0.9), (0.5, 1.0)];
            m.append(&TriangleMesh::prism_x(&body, -0.2, 0.2));
            m.append(&rounded((-0.25, 0.25), (0.9, 1.4), (0.85, 1.4), 0.12));
            m.append(&cuboid((-0.4, 0.4), (0.45, 0.55), (0.95, 1.05)));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounding_boxes_match_class_dimensions() {
        for class in VehicleClass::ALL {
            let m = builtin_vehicle_mesh(class);
            let (lo, hi) = m.bounds();
            let (l, w, h) = class.dimensions();
            let ext = hi - lo;
            assert!((ext.y - l).abs() < 1e-12, "{class} length {}", ext.y);
            assert!((ext.x - w).abs() < 1e-12, "{class} width {}", ext.x);
            assert!((ext.z - h).abs() < 1e-12, "{class} height {}", ext.z);
            assert_eq!(lo.y, 0.0);
            assert_eq!(lo.z, 0.0);
            assert!(m.is_watertight());
            assert!(m.signed_volume() > 0.0);
        }
    }

    #[test]
    fn motorcycle_is_smallest() {
        let car = builtin_vehicle_mesh(VehicleClass::Car).extent();
        let moto = builtin_vehicle_mesh(VehicleClass::Motorcycle).extent();
        assert!(moto.x < car.x && moto.y < car.y && moto.z < car.z);
        let bus = builtin_vehicle_mesh(VehicleClass::Bus).extent();
        assert!((bus - Vec3::new(2.5, 12.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn class_names_round_trip() {
        for c in VehicleClass::ALL {
            assert_eq!(c.name().parse::<VehicleClass>().unwrap(), c);
        }
        assert!("tram".parse::<VehicleClass>().is_err());
    }
}
