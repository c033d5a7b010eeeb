use super::{signed_distance, GeometryError, PlaneEquation, Vec3};

/// Which face of the surface a triangle renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceTag {
    Outer,
    /// Reversed-winding copy drawn with the darkened inner-surface shading.
    Inner,
}

/// Indexed triangle mesh with one [`FaceTag`] per triangle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    tags: Vec<FaceTag>,
}

/// Axis-aligned bounds of a non-empty vertex set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl BoundingBox {
    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }
}

/// Geometric normal of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceNormal {
    Unit(Vec3),
    /// Area at or below the zero-area tolerance.
    Degenerate,
}

impl FaceNormal {
    /// The unit normal, or the zero vector for a degenerate triangle.
    pub fn vector(self) -> Vec3 {
        match self {
            FaceNormal::Unit(n) => n,
            FaceNormal::Degenerate => Vec3::ZERO,
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(self, FaceNormal::Degenerate)
    }
}

/// Relative zero-area tolerance: a triangle is degenerate when its area is
/// at most this fraction of the squared bounding-box diagonal.
pub const DEGENERATE_AREA_TOLERANCE: f64 = 1e-12;

/// Which point of a triangle decides its side of the slicing plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClipRule {
    /// One distance per triangle, taken at its centroid.
    #[default]
    Centroid,
    /// Keep the triangle if any vertex is on the kept side.
    AnyVertex,
}

impl TriangleMesh {
    /// Builds an all-outer mesh, checking every index against the vertex count.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        let tags = vec![FaceTag::Outer; triangles.len()];
        Self::with_tags(vertices, triangles, tags)
    }

    pub fn with_tags(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>, tags: Vec<FaceTag>) -> Result<Self, GeometryError> {
        if tags.len() != triangles.len() {
            return Err(GeometryError::TagCountMismatch {
                triangles: triangles.len(),
                tags: tags.len(),
            });
        }
        if let Some(v) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteVertex(v));
        }
        let count = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= count) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle: t,
                    index,
                    vertex_count: count,
                });
            }
        }
        Ok(TriangleMesh {
            vertices,
            triangles,
            tags,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn tags(&self) -> &[FaceTag] {
        &self.tags
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [i, j, k] = self.triangles[t];
        [
            self.vertices[i as usize],
            self.vertices[j as usize],
            self.vertices[k as usize],
        ]
    }

    pub fn centroid(&self, t: usize) -> Vec3 {
        let [p, q, r] = self.corners(t);
        (p + q + r) * (1.0 / 3.0)
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let first = *self.vertices.first()?;
        let (min, max) = self
            .vertices
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Some(BoundingBox { min, max })
    }

    /// Per-triangle geometric normals `normalize((v1−v0)×(v2−v0))`.
    pub fn face_normals(&self) -> Vec<FaceNormal> {
        let diag2 = self.bounding_box().map(|b| b.diagonal().powi(2)).unwrap_or(0.0);
        let area_floor = DEGENERATE_AREA_TOLERANCE * diag2;
        (0..self.triangle_count())
            .map(|t| {
                let [p, q, r] = self.corners(t);
                let n = (q - p).cross(r - p);
                let len = n.norm();
                if len == 0.0 || 0.5 * len <= area_floor || !len.is_finite() {
                    FaceNormal::Degenerate
                } else {
                    FaceNormal::Unit(n * (1.0 / len))
                }
            })
            .collect()
    }

    /// Visibility mask against the slicing plane: `true` means drawn.
    pub fn classify(&self, plane: &PlaneEquation, rule: ClipRule) -> Vec<bool> {
        match rule {
            ClipRule::Centroid => (0..self.triangle_count())
                .map(|t| signed_distance(plane, self.centroid(t)) >= 0.0)
                .collect(),
            ClipRule::AnyVertex => {
                let side: Vec<bool> = self
                    .vertices
                    .iter()
                    .map(|&v| signed_distance(plane, v) >= 0.0)
                    .collect();
                self.triangles
                    .iter()
                    .map(|tri| tri.iter().any(|&i| side[i as usize]))
                    .collect()
            }
        }
    }

    /// Appends a reversed-winding inner copy of every triangle, sharing the
    /// vertex list. Fails if the mesh already has inner faces.
    pub fn double_sided(&self) -> Result<TriangleMesh, GeometryError> {
        if self.tags.contains(&FaceTag::Inner) {
            return Err(GeometryError::AlreadyDoubleSided);
        }
        let n = self.triangles.len();
        let mut triangles = Vec::with_capacity(2 * n);
        triangles.extend_from_slice(&self.triangles);
        triangles.extend(self.triangles.iter().map(|&[i, j, k]| [i, k, j]));
        let mut tags = vec![FaceTag::Outer; n];
        tags.resize(2 * n, FaceTag::Inner);
        Ok(TriangleMesh {
            vertices: self.vertices.clone(),
            triangles,
            tags,
        })
    }
}

pub fn classify_triangles(mesh: &TriangleMesh, plane: &PlaneEquation, rule: ClipRule) -> Vec<bool> {
    mesh.classify(plane, rule)
}

pub fn make_double_sided(mesh: &TriangleMesh) -> Result<TriangleMesh, GeometryError> {
    mesh.double_sided()
}

/// Simple closed meshes used as fixtures and demo models.
pub mod primitives {
    use super::{TriangleMesh, Vec3};
    use std::collections::HashMap;

    /// Unit cube `[0,1]³`, 8 vertices, 12 outward-wound triangles.
    ///
    /// Vertex `i` sits at `(i & 1, (i >> 1) & 1, (i >> 2) & 1)`. Each face
    /// quad `(a, b, c, d)` in counter-clockwise order seen from outside is
    /// split along its `a–c` diagonal into `(a, b, c)` and `(a, c, d)`.
    pub fn unit_cube() -> TriangleMesh {
        let vertices = (0..8)
            .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let quads: [[u32; 4]; 6] = [
            [0, 2, 3, 1], // z = 0
            [4, 5, 7, 6], // z = 1
            [0, 1, 5, 4], // y = 0
            [2, 6, 7, 3], // y = 1
            [0, 4, 6, 2], // x = 0
            [1, 3, 7, 5], // x = 1
        ];
        let triangles = quads.iter().flat_map(|&[a, b, c, d]| [[a, b, c], [a, c, d]]).collect();
        TriangleMesh::new(vertices, triangles).expect("cube indices are in range")
    }

    /// Icosahedron subdivided `level` times and projected onto the sphere of
    /// the given radius.
    pub fn icosphere(radius: f64, level: u32) -> TriangleMesh {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = [
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
        .map(|&(x, y, z)| {
            let v = Vec3::new(x, y, z);
            v * (1.0 / v.norm())
        })
        .collect();
        let mut faces: Vec<[u32; 3]> = vec![
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
        for _ in 0..level {
            let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
            let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let m = (verts[a as usize] + verts[b as usize]) * 0.5;
                    verts.push(m * (1.0 / m.norm()));
                    (verts.len() - 1) as u32
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for &[a, b, c] in &faces {
                let ab = mid(a, b, &mut verts);
                let bc = mid(b, c, &mut verts);
                let ca = mid(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let verts = verts.into_iter().map(|v| v * radius).collect();
        TriangleMesh::new(verts, faces).expect("icosphere indices are in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(zs: [f64; 3]) -> TriangleMesh {
        TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, zs[0]),
                Vec3::new(1.0, 0.0, zs[1]),
                Vec3::new(0.0, 1.0, zs[2]),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    fn z_plane() -> PlaneEquation {
        PlaneEquation::new(0.0, 0.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn rejects_out_of_range_index() {
        let err = TriangleMesh::new(vec![Vec3::ZERO; 3], vec![[0, 1, 3]]).unwrap_err();
        assert!(matches!(err, GeometryError::IndexOutOfRange { index: 3, .. }));
    }

    #[test]
    fn classify_single_triangle_cases() {
        let p = z_plane();
        assert_eq!(single([1.0; 3]).classify(&p, ClipRule::Centroid), [true]);
        assert_eq!(single([-1.0; 3]).classify(&p, ClipRule::Centroid), [false]);
        let straddle = single([-1.0, -1.0, 1.0]);
        assert_eq!(straddle.classify(&p, ClipRule::Centroid), [false]);
        assert_eq!(straddle.classify(&p, ClipRule::AnyVertex), [true]);
    }

    #[test]
    fn classify_empty_mesh() {
        let m = TriangleMesh::default();
        assert!(m.classify(&z_plane(), ClipRule::Centroid).is_empty());
        assert!(m.classify(&z_plane(), ClipRule::AnyVertex).is_empty());
    }

    #[test]
    fn on_plane_counts_as_visible() {
        assert_eq!(single([0.0; 3]).classify(&z_plane(), ClipRule::Centroid), [true]);
    }

    #[test]
    fn degenerate_triangles_classify_without_error() {
        let m = TriangleMesh::new(vec![Vec3::new(0.0, 0.0, -2.0); 3], vec![[0, 1, 2]]).unwrap();
        assert_eq!(m.classify(&z_plane(), ClipRule::Centroid), [false]);
        assert!(m.face_normals()[0].is_degenerate());
    }

    #[test]
    fn double_sided_single_triangle() {
        let m = single([0.0; 3]).double_sided().unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 1]]);
        assert_eq!(m.tags(), &[FaceTag::Outer, FaceTag::Inner]);
        assert!(matches!(m.double_sided(), Err(GeometryError::AlreadyDoubleSided)));
    }

    #[test]
    fn double_sided_cube_and_empty() {
        let cube = primitives::unit_cube();
        let d = cube.double_sided().unwrap();
        assert_eq!(d.triangle_count(), 24);
        assert_eq!(d.tags().iter().filter(|&&t| t == FaceTag::Inner).count(), 12);
        assert_eq!(d.vertices(), cube.vertices());
        assert_eq!(TriangleMesh::default().double_sided().unwrap(), TriangleMesh::default());
    }

    #[test]
    fn cube_normals_point_outward() {
        let cube = primitives::unit_cube();
        let center = Vec3::new(0.5, 0.5, 0.5);
        for (t, n) in cube.face_normals().into_iter().enumerate() {
            assert!(n.vector().dot(cube.centroid(t) - center) > 0.0, "triangle {t}");
        }
    }

    #[test]
    fn icosphere_is_closed_and_outward() {
        let s = primitives::icosphere(2.0, 2);
        assert_eq!(s.triangle_count(), 20 * 16);
        for (t, n) in s.face_normals().into_iter().enumerate() {
            assert!(n.vector().dot(s.centroid(t)) > 0.0);
        }
        for v in s.vertices() {
            assert!((v.norm() - 2.0).abs() < 1e-12);
        }
    }
}
