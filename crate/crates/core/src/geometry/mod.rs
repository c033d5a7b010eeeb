//! Quaternion, plane and mesh math shared by every peer.
//!
//! Everything here is a pure function over `Copy` values or immutable
//! meshes, so any peer that applies the same inputs in the same order
//! arrives at bit-identical state.

mod matrix;
mod mesh;
mod plane;
mod quaternion;
mod state;
mod vector;

use thiserror::Error;

pub use matrix::{Mat3, Mat4};
pub use mesh::{
    classify_triangles, make_double_sided, primitives, BoundingBox, ClipRule, FaceNormal, FaceTag, TriangleMesh,
    DEGENERATE_AREA_TOLERANCE,
};
pub use plane::{signed_distance, transform_plane, PlaneEquation};
pub use quaternion::{quat_compose, quat_to_matrix, UnitQuaternion};
pub use state::{apply_gesture_delta, GestureDelta, ModelState, ScaleFactor, ScaleLimits};
pub use vector::{UnitVec3, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite value")]
    NonFinite,
    #[error("quaternion has zero norm")]
    ZeroQuaternion,
    #[error("plane normal has zero length")]
    ZeroNormal,
    #[error("rotation axis has zero length")]
    ZeroLengthAxis,
    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScaleFactor(f64),
    #[error("invalid scale limits [{min}, {max}]")]
    InvalidScaleLimits { min: f64, max: f64 },
    #[error("triangle {triangle} references vertex {index}, but there are {vertex_count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        vertex_count: usize,
    },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("{tags} face tags for {triangles} triangles")]
    TagCountMismatch { triangles: usize, tags: usize },
    #[error("mesh already contains inner faces")]
    AlreadyDoubleSided,
}

/// True when a squared norm is within a few ulps of one. Such values are
/// kept as-is instead of being rescaled, so normalizing is idempotent and
/// a value survives an exact text roundtrip bit-for-bit.
pub(crate) fn is_unit_norm_sq(n2: f64) -> bool {
    (n2 - 1.0).abs() <= 4.0 * f64::EPSILON
}
