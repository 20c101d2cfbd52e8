use std::collections::HashMap;

use nalgebra::Rotation3;
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::scene::Vec3;

/// Indexed triangle mesh in meters with a per-facet complex reflectivity.
///
/// Winding is counter-clockwise seen from outside, so `normal()` points out of
/// closed bodies. Facets are treated as two-sided when tracing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub reflectivity: Vec<Complex64>,
}

/// Perfect electric conductor.
pub const PEC: Complex64 = Complex64::new(-1.0, 0.0);

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = triangles.len();
        let mesh = Self { vertices, triangles, reflectivity: vec![PEC; n] };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(SimError::InvalidMesh("mesh has no triangles".into()));
        }
        if self.reflectivity.len() != self.triangles.len() {
            return Err(SimError::InvalidMesh("one reflectivity per facet required".into()));
        }
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= self.vertices.len()) {
                return Err(SimError::InvalidMesh(format!("triangle {i} references a missing vertex")));
            }
        }
        if self.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(SimError::InvalidMesh("non-finite vertex".into()));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, facet: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[facet];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unit outward normal.
    pub fn normal(&self, facet: usize) -> Vec3 {
        let [a, b, c] = self.corners(facet);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn area(&self, facet: usize) -> f64 {
        let [a, b, c] = self.corners(facet);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Sets one real-valued reflectivity on every facet.
    pub fn with_reflectivity(mut self, gamma: f64) -> Self {
        self.reflectivity.iter_mut().for_each(|r| *r = Complex64::new(gamma, 0.0));
        self
    }

    /// Number of undirected edges not shared by exactly two triangles.
    pub fn open_edge_count(&self) -> usize {
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        edges.values().filter(|&&n| n != 2).count()
    }

    pub fn is_watertight(&self) -> bool {
        self.open_edge_count() == 0
    }

    /// Signed enclosed volume; positive for closed meshes with outward normals.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|f| {
                let [a, b, c] = self.corners(f);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn extent(&self) -> Vec3 {
        let (lo, hi) = self.bounds();
        hi - lo
    }

    pub fn append(&mut self, other: &TriangleMesh) {
        let offset = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]));
        self.reflectivity.extend_from_slice(&other.reflectivity);
    }

    pub fn translated(mut self, by: Vec3) -> Self {
        self.vertices.iter_mut().for_each(|v| *v += by);
        self
    }

    pub fn rotated(mut self, rotation: &Rotation3<f64>) -> Self {
        self.vertices.iter_mut().for_each(|v| *v = rotation * *v);
        self
    }

    /// Closed axis-aligned box.
    pub fn cuboid(lo: Vec3, hi: Vec3) -> Self {
        let v = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
        let vertices = vec![
            v(lo.x, lo.y, lo.z),
            v(hi.x, lo.y, lo.z),
            v(hi.x, hi.y, lo.z),
            v(lo.x, hi.y, lo.z),
            v(lo.x, lo.y, hi.z),
            v(hi.x, lo.y, hi.z),
            v(hi.x, hi.y, hi.z),
            v(lo.x, hi.y, hi.z),
        ];
        let quads = [
            [0, 3, 2, 1], // bottom
            [4, 5, 6, 7], // top
            [0, 1, 5, 4], // -y
            [2, 3, 7, 6], // +y
            [1, 2, 6, 5], // +x
            [3, 0, 4, 7], // -x
        ];
        let triangles = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect::<Vec<_>>();
        let n = triangles.len();
        Self { vertices, triangles, reflectivity: vec![PEC; n] }
    }

    /// Closed prism: a convex polygon in the Y-Z plane extruded over `[x0, x1]`.
    /// The profile is given counter-clockwise seen from +X.
    pub fn prism_x(profile: &[(f64, f64)], x0: f64, x1: f64) -> Self {
        let n = profile.len();
        let mut vertices = Vec::with_capacity(2 * n);
        for &(y, z) in profile {
            vertices.push(Vec3::new(x0, y, z));
        }
        for &(y, z) in profile {
            vertices.push(Vec3::new(x1, y, z));
        }
        let mut triangles = Vec::new();
        for k in 1..n - 1 {
            // -X cap is seen from -X, so reverse the profile order.
            triangles.push([0, k + 1, k]);
            triangles.push([n, n + k, n + k + 1]);
        }
        for k in 0..n {
            let j = (k + 1) % n;
            triangles.push([k, j, n + j]);
            triangles.push([k, n + j, n + k]);
        }
        let m = triangles.len();
        Self { vertices, triangles, reflectivity: vec![PEC; m] }
    }

    /// Single-sided rectangle `a x b` centred at the origin in the X-Z plane,
    /// normal -Y (facing a radar on the -Y side).
    pub fn plate(a: f64, b: f64) -> Self {
        let (ha, hb) = (a / 2.0, b / 2.0);
        let vertices = vec![
            Vec3::new(-ha, 0.0, -hb),
            Vec3::new(ha, 0.0, -hb),
            Vec3::new(ha, 0.0, hb),
            Vec3::new(-ha, 0.0, hb),
        ];
        let triangles = vec![[0, 1, 2], [0, 2, 3]];
        Self { vertices, triangles, reflectivity: vec![PEC; 2] }
    }

    /// Right-angle dihedral opening toward -Y: hinge of length `a` along X,
    /// two faces of width `b` at +/-45 degrees to the Y axis.
    pub fn dihedral(a: f64, b: f64) -> Self {
        let ha = a / 2.0;
        let s = b / std::f64::consts::SQRT_2;
        let vertices = vec![
            Vec3::new(-ha, 0.0, 0.0),
            Vec3::new(ha, 0.0, 0.0),
            Vec3::new(ha, -s, s),
            Vec3::new(-ha, -s, s),
            Vec3::new(ha, -s, -s),
            Vec3::new(-ha, -s, -s),
        ];
        let triangles = vec![[0, 1, 2], [0, 2, 3], [0, 4, 1], [0, 5, 4]];
        Self { vertices, triangles, reflectivity: vec![PEC; 4] }
    }

    /// Closed icosphere of the given radius; `subdivisions` quadruples the facet count.
    pub fn icosphere(radius: f64, subdivisions: u32) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vec3> = [
            (-1.0, t, 0.0),
            (1.0, t, 0.0),
            (-1.0, -t, 0.0),
            (1.0, -t, 0.0),
            (0.0, -1.0, t),
            (0.0, 1.0, t),
            (0.0, -1.0, -t),
            (0.0, 1.0, -t),
            (t, 0.0, -1.0),
            (t, 0.0, 1.0),
            (-t, 0.0, -1.0),
            (-t, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut mid = |a: usize, b: usize, vs: &mut Vec<Vec3>| -> usize {
                *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    vs.push(((vs[a] + vs[b]) / 2.0).normalize());
                    vs.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut vertices);
                let bc = mid(b, c, &mut vertices);
                let ca = mid(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        vertices.iter_mut().for_each(|v| *v *= radius);
        let n = faces.len();
        Self { vertices, triangles: faces, reflectivity: vec![PEC; n] }
    }

    /// Closed box with every edge and corner rounded to `radius`; each
    /// quarter-round is split into `2 * steps` facets.
    pub fn rounded_box(lo: Vec3, hi: Vec3, radius: f64, steps: usize) -> Self {
        let half = (hi - lo) / 2.0;
        let centre = (hi + lo) / 2.0;
        let r = radius.clamp(0.0, half.min());
        if r == 0.0 {
            return Self::cuboid(lo, hi);
        }
        let steps = steps.max(1);
        // Samples along one axis of a face of the unit-mapped cube: the flat
        // middle is a single span, each rounded band is `steps` spans placed
        // at equal angles once projected onto the arc.
        let axis = |h: f64| -> Vec<f64> {
            let core = h - r;
            let mut band: Vec<f64> = (1..steps)
                .map(|i| {
                    let theta = std::f64::consts::FRAC_PI_4 * i as f64 / steps as f64;
                    core + r * theta.tan()
                })
                .collect();
            band.push(h);
            let mut out: Vec<f64> = band.iter().rev().map(|v| -v).collect();
            if core > 0.0 {
                out.push(-core);
                out.push(core);
            } else {
                out.push(0.0);
            }
            out.extend(band);
            out
        };
        let samples = [axis(half.x), axis(half.y), axis(half.z)];

        let mut vertices: Vec<Vec3> = Vec::new();
        let mut lookup: HashMap<[u64; 3], usize> = HashMap::new();
        let mut index = |p: Vec3, vs: &mut Vec<Vec3>| -> usize {
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            *lookup.entry(key).or_insert_with(|| {
                vs.push(p);
                vs.len() - 1
            })
        };
        let mut triangles = Vec::new();
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for sign in [-1.0, 1.0] {
                let (sb, sc) = (&samples[b], &samples[c]);
                let mut grid = vec![vec![0usize; sc.len()]; sb.len()];
                for (i, &u) in sb.iter().enumerate() {
                    for (j, &w) in sc.iter().enumerate() {
                        let mut p = Vec3::zeros();
                        p[a] = sign * half[a];
                        p[b] = u;
                        p[c] = w;
                        grid[i][j] = index(p, &mut vertices);
                    }
                }
                for i in 0..sb.len() - 1 {
                    for j in 0..sc.len() - 1 {
                        let (q0, q1, q2, q3) = (grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]);
                        // (b, c, a) is right-handed, so this winding faces +a
                        if sign > 0.0 {
                            triangles.push([q0, q1, q2]);
                            triangles.push([q0, q2, q3]);
                        } else {
                            triangles.push([q0, q2, q1]);
                            triangles.push([q0, q3, q2]);
                        }
                    }
                }
            }
        }
        let core = half.map(|h| h - r);
        for v in vertices.iter_mut() {
            let inner = Vec3::new(v.x.clamp(-core.x, core.x), v.y.clamp(-core.y, core.y), v.z.clamp(-core.z, core.z));
            let d = *v - inner;
            let len = d.norm();
            let mapped = if len > 0.0 && r > 0.0 { inner + d * (r / len) } else { *v };
            *v = mapped + centre;
        }
        let n = triangles.len();
        Self { vertices, triangles, reflectivity: vec![PEC; n] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounded_box_is_closed_and_fits_bounds() {
        let (lo, hi) = (Vec3::new(-1.0, 0.0, 0.3), Vec3::new(1.0, 5.0, 1.0));
        let m = TriangleMesh::rounded_box(lo, hi, 0.3, 6);
        assert!(m.is_watertight());
        let (blo, bhi) = m.bounds();
        assert!((blo - lo).norm() < 1e-12 && (bhi - hi).norm() < 1e-12);
        // box volume minus the rounding deficit of edges and corners
        let r: f64 = 0.3;
        let (ex, ey, ez) = (2.0 - 2.0 * r, 5.0 - 2.0 * r, 0.7 - 2.0 * r);
        let edge_deficit = (4.0 - std::f64::consts::PI) * r * r * (ex + ey + ez);
        let corner_deficit = 8.0 * r.powi(3) - 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
        let want = 2.0 * 5.0 * 0.7 - edge_deficit - corner_deficit;
        let v = m.signed_volume();
        assert!(v > 0.0 && (v - want).abs() < 0.01 * want, "{v} vs {want}");
        // zero radius degenerates to the plain box
        let sharp = TriangleMesh::rounded_box(lo, hi, 0.0, 3);
        assert!((sharp.signed_volume() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn cuboid_is_closed_and_outward() {
        let m = TriangleMesh::cuboid(Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 3.0, 4.0));
        assert!(m.is_watertight());
        assert!((m.signed_volume() - 24.0).abs() < 1e-12);
        // bottom face points down
        assert!((m.normal(0) - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn prism_is_closed_and_outward() {
        let profile = [(0.0, 0.0), (4.0, 0.0), (3.0, 1.0), (1.0, 1.0)];
        let m = TriangleMesh::prism_x(&profile, -1.0, 1.0);
        assert!(m.is_watertight());
        assert!((m.signed_volume() - 2.0 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn icosphere_volume_converges() {
        let m = TriangleMesh::icosphere(1.0, 4);
        assert!(m.is_watertight());
        let v = m.signed_volume();
        assert!((v - 4.0 / 3.0 * std::f64::consts::PI).abs() < 0.02, "{v}");
    }

    #[test]
    fn open_shapes_are_flagged() {
        assert!(!TriangleMesh::plate(1.0, 1.0).is_watertight());
        assert!(!TriangleMesh::dihedral(1.0, 1.0).is_watertight());
        let d = TriangleMesh::dihedral(1.0, 1.0);
        // both faces look into the opening (toward -Y)
        for f in 0..4 {
            assert!(d.normal(f).y < 0.0);
        }
    }

    #[test]
    fn invalid_index_rejected() {
        let r = TriangleMesh::new(vec![Vec3::zeros()], vec![[0, 1, 2]]);
        assert!(matches!(r, Err(SimError::InvalidMesh(_))));
        assert!(TriangleMesh::new(vec![], vec![]).is_err());
    }
}
