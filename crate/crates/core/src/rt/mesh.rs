use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Triangle soup with per-triangle unit normals from the winding order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut normals = Vec::with_capacity(triangles.len());
        for (k, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::MeshParse { line: 0, msg: format!("triangle {k} references a missing vertex") });
            }
            let n = unit_normal(tri.map(|i| vertices[i]))
                .ok_or_else(|| Error::MeshParse { line: 0, msg: format!("triangle {k} has zero area") })?;
            normals.push(n);
        }
        Ok(Self { vertices, triangles, normals })
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, k: usize) -> [Vec3; 3] {
        self.triangles[k].map(|i| self.vertices[i])
    }

    pub fn normal(&self, k: usize) -> Vec3 {
        self.normals[k]
    }

    /// Appends another mesh, reindexing its faces.
    pub fn merge(&mut self, other: &TriangleMesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(other.triangles.iter().map(|t| t.map(|i| i + off)));
        self.normals.extend_from_slice(&other.normals);
    }

    /// Serializes as the `v`/`f` OBJ subset.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }
}

fn unit_normal([a, b, c]: [Vec3; 3]) -> Option<Vec3> {
    let n = (b - a).cross(c - a);
    let area2 = n.norm();
    let scale = (b - a).norm().max((c - a).norm());
    if area2 <= 1e-12 * scale * scale || area2 == 0.0 {
        None
    } else {
        Some(n / area2)
    }
}

/// Parses the OBJ subset: `v x y z` and `f i j k` with 1-based indices.
/// Other lines are ignored. `f` entries may carry `/`-suffixes.
pub fn load_mesh(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces: Vec<([usize; 3], usize)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let err = |msg: String| Error::MeshParse { line, msg };
        let mut toks = raw.split_whitespace();
        match toks.next() {
            Some("v") => {
                let nums: Vec<f64> = toks
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad coordinate `{t}`"))))
                    .collect::<Result<_>>()?;
                if nums.len() != 3 || nums.iter().any(|v| !v.is_finite()) {
                    return Err(err("vertex needs three finite coordinates".into()));
                }
                vertices.push(Vec3::new(nums[0], nums[1], nums[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = toks
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        head.parse::<usize>().map_err(|_| err(format!("bad vertex index `{t}`")))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(err("face needs exactly three vertices".into()));
                }
                if idx.iter().any(|&i| i == 0) {
                    return Err(err("vertex indices are 1-based".into()));
                }
                faces.push(([idx[0] - 1, idx[1] - 1, idx[2] - 1], line));
            }
            _ => {}
        }
    }
    for (f, line) in &faces {
        let err = |msg: &str| Error::MeshParse { line: *line, msg: msg.into() };
        if f.iter().any(|&i| i >= vertices.len()) {
            return Err(err("face references a vertex that does not exist"));
        }
        if unit_normal(f.map(|i| vertices[i])).is_none() {
            return Err(err("face has zero area"));
        }
    }
    TriangleMesh::new(vertices, faces.into_iter().map(|f| f.0).collect())
}

/// Two triangles covering the planar quadrilateral `corners` (in order),
/// wound so the normal points along `normal`.
pub fn quad(mesh: &mut Vec<(Vec3, Vec3, Vec3)>, corners: [Vec3; 4], normal: Vec3) {
    let [p0, p1, p2, p3] = corners;
    let n = (p1 - p0).cross(p2 - p0);
    if n.dot(normal) >= 0.0 {
        mesh.push((p0, p1, p2));
        mesh.push((p0, p2, p3));
    } else {
        mesh.push((p0, p2, p1));
        mesh.push((p0, p3, p2));
    }
}

/// Builds a mesh from loose triangles, sharing no vertices.
pub fn from_triangles(tris: &[(Vec3, Vec3, Vec3)]) -> Result<TriangleMesh> {
    let mut vertices = Vec::with_capacity(tris.len() * 3);
    let mut faces = Vec::with_capacity(tris.len());
    for (a, b, c) in tris {
        let k = vertices.len();
        vertices.extend([*a, *b, *c]);
        faces.push([k, k + 1, k + 2]);
    }
    TriangleMesh::new(vertices, faces)
}

/// Closed axis-aligned box `[lo, hi]` with inward-facing normals.
pub fn box_mesh(lo: Vec3, hi: Vec3) -> Result<TriangleMesh> {
    let c = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
    let mut t = Vec::new();
    quad(&mut t, [c(lo.x, lo.y, lo.z), c(lo.x, hi.y, lo.z), c(lo.x, hi.y, hi.z), c(lo.x, lo.y, hi.z)], Vec3::X);
    quad(&mut t, [c(hi.x, lo.y, lo.z), c(hi.x, hi.y, lo.z), c(hi.x, hi.y, hi.z), c(hi.x, lo.y, hi.z)], -Vec3::X);
    quad(&mut t, [c(lo.x, lo.y, lo.z), c(hi.x, lo.y, lo.z), c(hi.x, lo.y, hi.z), c(lo.x, lo.y, hi.z)], Vec3::Y);
    quad(&mut t, [c(lo.x, hi.y, lo.z), c(hi.x, hi.y, lo.z), c(hi.x, hi.y, hi.z), c(lo.x, hi.y, hi.z)], -Vec3::Y);
    quad(&mut t, [c(lo.x, lo.y, lo.z), c(hi.x, lo.y, lo.z), c(hi.x, hi.y, lo.z), c(lo.x, hi.y, lo.z)], Vec3::Z);
    quad(&mut t, [c(lo.x, lo.y, hi.z), c(hi.x, lo.y, hi.z), c(hi.x, hi.y, hi.z), c(lo.x, hi.y, hi.z)], -Vec3::Z);
    from_triangles(&t)
}

/// Solid axis-aligned block with outward normals (obstacles such as pillars).
pub fn block_mesh(lo: Vec3, hi: Vec3) -> Result<TriangleMesh> {
    let inner = box_mesh(lo, hi)?;
    let tris: Vec<(Vec3, Vec3, Vec3)> = (0..inner.len())
        .map(|k| {
            let [a, b, c] = inner.triangle(k);
            (a, c, b)
        })
        .collect();
    from_triangles(&tris)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_face() {
        let m = load_mesh("# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.normal(0), Vec3::Z);
    }

    #[test]
    fn empty_is_free_space() {
        assert!(load_mesh("").unwrap().is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").unwrap_err();
        assert_eq!(e, Error::MeshParse { line: 4, msg: "vertex indices are 1-based".into() });
        let e = load_mesh("v 0 0\n").unwrap_err();
        assert!(matches!(e, Error::MeshParse { line: 1, .. }));
        let e = load_mesh("v 0 0 0\nv 1 0 0\nv 2 0 0\n\nf 1 2 3\n").unwrap_err();
        assert!(matches!(e, Error::MeshParse { line: 5, .. }));
        assert!(load_mesh("v 0 0 0\nf 1 2 3\n").is_err());
    }

    #[test]
    fn obj_round_trip() {
        let m = box_mesh(Vec3::ZERO, Vec3::new(2.0, 3.0, 4.0)).unwrap();
        assert_eq!(m.len(), 12);
        assert_eq!(load_mesh(&m.to_obj()).unwrap(), m);
    }

    #[test]
    fn box_normals_point_inward() {
        let m = box_mesh(Vec3::ZERO, Vec3::new(2.0, 3.0, 4.0)).unwrap();
        let centre = Vec3::new(1.0, 1.5, 2.0);
        for k in 0..m.len() {
            let [a, _, _] = m.triangle(k);
            assert!(m.normal(k).dot(centre - a) > 0.0);
        }
        let b = block_mesh(Vec3::ZERO, Vec3::new(2.0, 3.0, 4.0)).unwrap();
        for k in 0..b.len() {
            let [a, _, _] = b.triangle(k);
            assert!(b.normal(k).dot(centre - a) < 0.0);
        }
    }
}
