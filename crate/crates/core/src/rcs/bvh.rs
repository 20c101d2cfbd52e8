//! Bounding volume hierarchy over mesh facets for closest-hit ray queries.

use crate::rcs::mesh::TriangleMesh;
use crate::scene::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Self { lo: Vec3::repeat(f64::INFINITY), hi: Vec3::repeat(f64::NEG_INFINITY) }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn merge(&mut self, o: &Aabb) {
        self.lo = self.lo.inf(&o.lo);
        self.hi = self.hi.sup(&o.hi);
    }

    /// Slab test; returns the entry distance if the box is hit before `t_max`.
    fn hit(&self, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for a in 0..3 {
            let mut near = (self.lo[a] - origin[a]) * inv_dir[a];
            let mut far = (self.hi[a] - origin[a]) * inv_dir[a];
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // NaN from 0 * inf means the ray lies in the slab plane; keep the interval.
            if near.is_nan() || far.is_nan() {
                continue;
            }
            t0 = t0.max(near);
            t1 = t1.min(far * (1.0 + 4.0 * f64::EPSILON));
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: `count > 0`, facets `order[first..first + count]`. Inner: children `first`, `first + 1`.
    first: usize,
    count: usize,
}

/// Closest intersection along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub facet: usize,
    pub point: Vec3,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let n = mesh.triangles.len();
        let mut order: Vec<usize> = (0..n).collect();
        let boxes: Vec<Aabb> = (0..n)
            .map(|f| {
                let mut b = Aabb::empty();
                mesh.corners(f).iter().for_each(|c| b.grow(c));
                b
            })
            .collect();
        let centroids: Vec<Vec3> = boxes.iter().map(|b| (b.lo + b.hi) * 0.5).collect();
        let mut nodes = vec![Node { bounds: Aabb::empty(), first: 0, count: 0 }];
        let mut stack = vec![(0usize, 0usize, n)];
        while let Some((idx, start, end)) = stack.pop() {
            let mut bounds = Aabb::empty();
            let mut cbounds = Aabb::empty();
            for &f in &order[start..end] {
                bounds.merge(&boxes[f]);
                cbounds.grow(&centroids[f]);
            }
            nodes[idx].bounds = bounds;
            if end - start <= LEAF_SIZE {
                nodes[idx].first = start;
                nodes[idx].count = end - start;
                continue;
            }
            let ext = cbounds.hi - cbounds.lo;
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let mid = (start + end) / 2;
            order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
            });
            let left = nodes.len();
            nodes.push(Node { bounds: Aabb::empty(), first: 0, count: 0 });
            nodes.push(Node { bounds: Aabb::empty(), first: 0, count: 0 });
            nodes[idx].first = left;
            nodes[idx].count = 0;
            stack.push((left, start, mid));
            stack.push((left + 1, mid, end));
        }
        Self { nodes, order }
    }

    /// Closest facet hit with distance in `(t_min, t_max)`.
    pub fn intersect(
        &self,
        mesh: &TriangleMesh,
        origin: &Vec3,
        dir: &Vec3,
        t_min: f64,
        t_max: f64,
    ) -> Option<Hit> {
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if node.bounds.hit(origin, &inv, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                for &f in &self.order[node.first..node.first + node.count] {
                    if let Some(t) = intersect_triangle(mesh, f, origin, dir) {
                        let closer = t < limit
                            || (t == limit && best.is_some_and(|b| f < b.facet));
                        if t > t_min && closer {
                            limit = t;
                            best = Some(Hit { distance: t, facet: f, point: origin + dir * t });
                        }
                    }
                }
            } else {
                let (a, b) = (node.first, node.first + 1);
                let ta = self.nodes[a].bounds.hit(origin, &inv, limit);
                let tb = self.nodes[b].bounds.hit(origin, &inv, limit);
                match (ta, tb) {
                    (Some(x), Some(y)) => {
                        // visit the nearer child first
                        if x <= y {
                            stack.push(b);
                            stack.push(a);
                        } else {
                            stack.push(a);
                            stack.push(b);
                        }
                    }
                    (Some(_), None) => stack.push(a),
                    (None, Some(_)) => stack.push(b),
                    (None, None) => {}
                }
            }
        }
        best
    }

    pub fn occluded(&self, mesh: &TriangleMesh, origin: &Vec3, dir: &Vec3, t_min: f64) -> bool {
        self.intersect(mesh, origin, dir, t_min, f64::INFINITY).is_some()
    }
}

/// Two-sided Moller-Trumbore; returns the ray parameter.
fn intersect_triangle(mesh: &TriangleMesh, facet: usize, origin: &Vec3, dir: &Vec3) -> Option<f64> {
    let [a, b, c] = mesh.corners(facet);
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-15 * e1.norm() * e2.norm() {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) * inv_det)
}
