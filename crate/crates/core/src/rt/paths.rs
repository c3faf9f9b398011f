use serde::{Deserialize, Serialize};

use super::mesh::TriangleMesh;
use crate::geom::Vec3;

/// Distance along a segment within which hits are treated as the segment's
/// own endpoints.
const SEGMENT_EPS: f64 = 1e-6;
/// Points closer than this to a plane count as lying on it.
const PLANE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    pub src: Vec3,
    pub dst: Vec3,
    /// Ordered reflection points.
    pub reflections: Vec<Vec3>,
    /// Triangle hit at each reflection.
    pub triangles: Vec<usize>,
    pub length: f64,
}

impl PropagationPath {
    pub fn bounces(&self) -> usize {
        self.triangles.len()
    }

    /// `src`, the reflection points, then `dst`.
    pub fn polyline(&self) -> Vec<Vec3> {
        let mut v = Vec::with_capacity(self.reflections.len() + 2);
        v.push(self.src);
        v.extend_from_slice(&self.reflections);
        v.push(self.dst);
        v
    }

    /// Unit direction leaving `src`.
    pub fn departure(&self) -> Vec3 {
        let next = self.reflections.first().copied().unwrap_or(self.dst);
        (next - self.src).normalized().unwrap_or(Vec3::Z)
    }

    /// Unit direction pointing from `dst` back along the final segment.
    pub fn arrival(&self) -> Vec3 {
        let prev = self.reflections.last().copied().unwrap_or(self.src);
        (prev - self.dst).normalized().unwrap_or(Vec3::Z)
    }
}

/// Moller-Trumbore style ray/triangle test with inclusive edges. Returns the
/// hit distance along the unit direction `dir` if it is positive.
pub fn ray_triangle(origin: Vec3, dir: Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(e2);
    let det = e1.dot(p);
    let scale = e1.norm() * e2.norm();
    if det.abs() <= 1e-12 * scale {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = dir.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t > 0.0).then_some(t)
}

/// True if the open segment `a -> b` crosses no triangle.
pub fn segment_clear(mesh: &TriangleMesh, a: Vec3, b: Vec3) -> bool {
    let d = b - a;
    let len = d.norm();
    if len <= SEGMENT_EPS {
        return true;
    }
    let dir = d / len;
    (0..mesh.len()).all(|k| match ray_triangle(a, dir, &mesh.triangle(k)) {
        Some(t) => t <= SEGMENT_EPS || t >= len - SEGMENT_EPS,
        None => true,
    })
}

struct Plane {
    n: Vec3,
    d: f64,
}

impl Plane {
    fn of(mesh: &TriangleMesh, k: usize) -> Self {
        let n = mesh.normal(k);
        Self { n, d: n.dot(mesh.triangle(k)[0]) }
    }

    fn signed(&self, p: Vec3) -> f64 {
        self.n.dot(p) - self.d
    }

    fn mirror(&self, p: Vec3) -> Vec3 {
        p - self.n * (2.0 * self.signed(p))
    }

    /// Intersection of the line `a -> b` with the plane, when `a` and `b`
    /// lie strictly on opposite sides.
    fn cross(&self, a: Vec3, b: Vec3) -> Option<Vec3> {
        let (sa, sb) = (self.signed(a), self.signed(b));
        if sa * sb >= 0.0 {
            return None;
        }
        Some(a + (b - a) * (sa / (sa - sb)))
    }

    fn same_plane(&self, o: &Plane) -> bool {
        (self.n.dot(o.n).abs() - 1.0).abs() < 1e-12 && (self.d - self.n.dot(o.n).signum() * o.d).abs() < PLANE_EPS
    }
}

/// Inclusive point-in-triangle test for a point on the triangle's plane.
fn inside(tri: &[Vec3; 3], n: Vec3, p: Vec3) -> bool {
    let tol = -1e-12;
    (0..3).all(|i| {
        let (a, b) = (tri[i], tri[(i + 1) % 3]);
        let edge = (b - a).norm().max(1e-300);
        n.dot((b - a).cross(p - a)) / edge >= tol * edge
    })
}

fn same_side(plane: &Plane, a: Vec3, b: Vec3) -> bool {
    let (sa, sb) = (plane.signed(a), plane.signed(b));
    (sa > PLANE_EPS && sb > PLANE_EPS) || (sa < -PLANE_EPS && sb < -PLANE_EPS)
}

/// All specular paths from `src` to `dst` with at most `max_bounces`
/// reflections (0, 1 or 2), by the image method. Paths whose reflection
/// points coincide (a shared edge of two coplanar triangles) are reported
/// once. Ordered by bounce count, then triangle ids.
pub fn find_paths(mesh: &TriangleMesh, src: Vec3, dst: Vec3, max_bounces: usize) -> Vec<PropagationPath> {
    assert!(max_bounces <= 2, "at most two reflections are supported");
    let mut out = Vec::new();
    if segment_clear(mesh, src, dst) {
        out.push(PropagationPath {
            src,
            dst,
            reflections: Vec::new(),
            triangles: Vec::new(),
            length: src.distance(dst),
        });
    }
    if max_bounces == 0 {
        return out;
    }
    let planes: Vec<Plane> = (0..mesh.len()).map(|k| Plane::of(mesh, k)).collect();
    let tris: Vec<[Vec3; 3]> = (0..mesh.len()).map(|k| mesh.triangle(k)).collect();
    let mut first: Vec<PropagationPath> = Vec::new();
    for (i, pl) in planes.iter().enumerate() {
        if !same_side(pl, src, dst) {
            continue;
        }
        let img = pl.mirror(src);
        let Some(p) = pl.cross(img, dst) else { continue };
        if !inside(&tris[i], pl.n, p) {
            continue;
        }
        if !segment_clear(mesh, src, p) || !segment_clear(mesh, p, dst) {
            continue;
        }
        push_unique(
            &mut first,
            PropagationPath { src, dst, reflections: vec![p], triangles: vec![i], length: img.distance(dst) },
        );
    }
    out.extend(first);
    if max_bounces < 2 {
        return out;
    }
    let mut second: Vec<PropagationPath> = Vec::new();
    for (i, pi) in planes.iter().enumerate() {
        let side_src = pi.signed(src);
        if side_src.abs() <= PLANE_EPS {
            continue;
        }
        let img1 = pi.mirror(src);
        for (j, pj) in planes.iter().enumerate() {
            if i == j || pi.same_plane(pj) {
                continue;
            }
            if pj.signed(dst).abs() <= PLANE_EPS {
                continue;
            }
            let img2 = pj.mirror(img1);
            let Some(p2) = pj.cross(img2, dst) else { continue };
            if !inside(&tris[j], pj.n, p2) {
                continue;
            }
            let Some(p1) = pi.cross(img1, p2) else { continue };
            if !inside(&tris[i], pi.n, p1) {
                continue;
            }
            if !same_side(pi, src, p2) || !same_side(pj, p1, dst) {
                continue;
            }
            if !segment_clear(mesh, src, p1) || !segment_clear(mesh, p1, p2) || !segment_clear(mesh, p2, dst) {
                continue;
            }
            push_unique(
                &mut second,
                PropagationPath {
                    src,
                    dst,
                    reflections: vec![p1, p2],
                    triangles: vec![i, j],
                    length: img2.distance(dst),
                },
            );
        }
    }
    out.extend(second);
    out
}

fn push_unique(paths: &mut Vec<PropagationPath>, p: PropagationPath) {
    let dup = paths
        .iter()
        .any(|q| q.reflections.iter().zip(&p.reflections).all(|(a, b)| a.distance(*b) <= 1e-9 * (1.0 + p.length)));
    if !dup {
        paths.push(p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rt::mesh::{from_triangles, load_mesh};
    use approx::assert_relative_eq;

    fn floor() -> TriangleMesh {
        from_triangles(&[
            (Vec3::new(-10.0, -10.0, 0.0), Vec3::new(10.0, -10.0, 0.0), Vec3::new(10.0, 10.0, 0.0)),
            (Vec3::new(-10.0, -10.0, 0.0), Vec3::new(10.0, 10.0, 0.0), Vec3::new(-10.0, 10.0, 0.0)),
        ])
        .unwrap()
    }

    #[test]
    fn ray_triangle_examples() {
        let tri = [Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, -1.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        assert_eq!(ray_triangle(Vec3::new(0.0, 0.0, -1.0), Vec3::Z, &tri), Some(1.0));
        assert_eq!(ray_triangle(Vec3::new(0.0, 0.0, 1.0), Vec3::X, &tri), None);
        assert_eq!(ray_triangle(Vec3::new(0.0, 0.0, 1.0), Vec3::Z, &tri), None);
        // inclusive edge
        assert!(ray_triangle(Vec3::new(0.0, -1.0, -1.0), Vec3::Z, &tri).is_some());
    }

    #[test]
    fn free_space_gives_direct_path() {
        let mesh = load_mesh("").unwrap();
        let (a, b) = (Vec3::new(1.0, 2.0, 3.0), Vec3::new(-2.0, 0.0, 1.0));
        let paths = find_paths(&mesh, a, b, 2);
        assert_eq!(paths.len(), 1);
        assert_relative_eq!(paths[0].length, a.distance(b), max_relative = 1e-15);
    }

    #[test]
    fn floor_bounce() {
        let paths = find_paths(&floor(), Vec3::new(0.0, 0.0, 1.0), Vec3::new(2.0, 0.0, 1.0), 2);
        assert_eq!(paths.len(), 2);
        assert_relative_eq!(paths[0].length, 2.0, max_relative = 1e-15);
        assert_eq!(paths[1].bounces(), 1);
        assert_relative_eq!(paths[1].length, 8f64.sqrt(), max_relative = 1e-12);
        assert!(paths[1].reflections[0].distance(Vec3::new(1.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn shared_edge_reported_once() {
        // The reflection point (0, 0, 0) lies on the diagonal shared by both floor triangles.
        let paths = find_paths(&floor(), Vec3::new(-1.0, -1.0, 1.0), Vec3::new(1.0, 1.0, 1.0), 1);
        assert_eq!(paths.iter().filter(|p| p.bounces() == 1).count(), 1);
    }

    #[test]
    fn blocked_direct_path() {
        let wall = from_triangles(&[(Vec3::new(1.0, -5.0, -5.0), Vec3::new(1.0, 5.0, -5.0), Vec3::new(1.0, 0.0, 5.0))])
            .unwrap();
        let paths = find_paths(&wall, Vec3::ZERO, Vec3::new(2.0, 0.0, 0.0), 2);
        assert!(paths.is_empty());
    }
}
