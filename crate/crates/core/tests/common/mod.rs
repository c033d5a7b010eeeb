//! Reference implementations used as test oracles. They work on raw arrays
//! and share no code with the library.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;

pub type Quat = [f64; 4];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Hamilton product, written out term by term.
pub fn hamilton(p: Quat, q: Quat) -> Quat {
    let [a1, b1, c1, d1] = p;
    let [a2, b2, c2, d2] = q;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

/// `q v q*` with `v` as a pure quaternion.
pub fn sandwich(q: Quat, v: [f64; 3]) -> [f64; 3] {
    let conj = [q[0], -q[1], -q[2], -q[3]];
    let r = hamilton(hamilton(q, [0.0, v[0], v[1], v[2]]), conj);
    [r[1], r[2], r[3]]
}

/// Rotation matrix built column by column from rotated basis vectors.
pub fn matrix_by_columns(q: Quat) -> [[f64; 3]; 3] {
    let cols = [
        sandwich(q, [1.0, 0.0, 0.0]),
        sandwich(q, [0.0, 1.0, 0.0]),
        sandwich(q, [0.0, 0.0, 1.0]),
    ];
    let mut m = [[0.0; 3]; 3];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..3 {
            m[i][j] = c[i];
        }
    }
    m
}

/// 4×4 block-diagonal matrix `diag(R, 1)` applied to `(a, b, c, d)`, then
/// rescaled so `(a, b, c)` has unit length.
pub fn augmented_plane(q: Quat, plane: [f64; 4]) -> [f64; 4] {
    let r = matrix_by_columns(q);
    let mut m = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = r[i][j];
        }
    }
    m[3][3] = 1.0;
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = (0..4).map(|j| m[i][j] * plane[j]).sum();
    }
    let n = (out[0] * out[0] + out[1] * out[1] + out[2] * out[2]).sqrt();
    out.map(|x| x / n)
}

pub fn plane_residual(p: [f64; 4], x: [f64; 3]) -> f64 {
    p[0] * x[0] + p[1] * x[1] + p[2] * x[2] - p[3]
}

pub fn random_unit_vec(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

pub fn random_quat(rng: &mut impl Rng) -> Quat {
    loop {
        let q: Quat = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return q.map(|x| x / n);
        }
    }
}

/// A point on `plane`: the foot of the normal plus two tangent offsets.
pub fn point_on_plane(rng: &mut impl Rng, plane: [f64; 4]) -> [f64; 3] {
    let n = [plane[0], plane[1], plane[2]];
    let helper = if n[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let t1 = cross(n, helper);
    let t2 = cross(n, t1);
    let (s, t) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
    std::array::from_fn(|i| n[i] * plane[3] + s * t1[i] + t * t2[i])
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Centroid,
    AnyVertex,
}

/// Per-triangle visibility by direct evaluation of the signed distance.
pub fn brute_mask(verts: &[[f64; 3]], tris: &[[usize; 3]], plane: [f64; 4], rule: Rule) -> Vec<bool> {
    tris.iter()
        .map(|t| {
            let [p, q, r] = t.map(|i| verts[i]);
            match rule {
                Rule::Centroid => {
                    let c: [f64; 3] = std::array::from_fn(|k| (p[k] + q[k] + r[k]) * (1.0 / 3.0));
                    plane_residual(plane, c) >= 0.0
                }
                Rule::AnyVertex => [p, q, r].iter().any(|v| plane_residual(plane, *v) >= 0.0),
            }
        })
        .collect()
}
