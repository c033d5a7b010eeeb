//! Mesh import and export: binary STL, ASCII STL and a minimal OBJ subset.
//!
//! Loaded meshes are all-outer. STL vertices are welded by exact bit
//! equality of their coordinates; OBJ keeps its vertex list as written.
//! Coordinates are taken as millimetres and never converted.

mod obj;
mod stl;

use std::fmt;

use thiserror::Error;

use crate::geometry::{FaceNormal, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshFormat {
    StlBinary,
    StlAscii,
    Obj,
}

impl MeshFormat {
    pub fn name(self) -> &'static str {
        match self {
            MeshFormat::StlBinary => "stl_binary",
            MeshFormat::StlAscii => "stl_ascii",
            MeshFormat::Obj => "obj",
        }
    }
}

impl fmt::Display for MeshFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where in the input a parse error happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// Byte offset from the start of the input.
    Byte(usize),
    /// One-based line number.
    Line(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Byte(b) => write!(f, "byte {b}"),
            Location::Line(l) => write!(f, "line {l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshIoError {
    #[error("empty input")]
    EmptyInput,
    #[error("unrecognized mesh format")]
    UnknownFormat,
    #[error("{format} parse error at {location}: {message}")]
    Parse {
        format: MeshFormat,
        location: Location,
        message: String,
    },
    #[error("{format}: index {index} out of range ({vertex_count} vertices) at {location}")]
    IndexOutOfRange {
        format: MeshFormat,
        location: Location,
        index: i64,
        vertex_count: usize,
    },
    #[error("cannot save an empty mesh")]
    EmptyMesh,
    #[error("vertex {0} does not fit in a 32-bit float")]
    NotRepresentable(usize),
}

impl MeshIoError {
    pub(crate) fn parse(format: MeshFormat, location: Location, message: impl Into<String>) -> Self {
        MeshIoError::Parse {
            format,
            location,
            message: message.into(),
        }
    }

    pub fn location(&self) -> Option<Location> {
        match self {
            MeshIoError::Parse { location, .. } | MeshIoError::IndexOutOfRange { location, .. } => Some(*location),
            _ => None,
        }
    }
}

/// Parses `bytes` as a mesh, detecting the format when `format` is `None`.
///
/// Detection order: text starting with `solid` that parses as ASCII STL;
/// then binary STL whose facet count matches the byte length exactly; then
/// OBJ if any line starts with `v ` or `f `.
pub fn load_mesh(bytes: &[u8], format: Option<MeshFormat>) -> Result<TriangleMesh, MeshIoError> {
    if bytes.is_empty() {
        return Err(MeshIoError::EmptyInput);
    }
    match format {
        Some(MeshFormat::StlBinary) => stl::parse_binary(bytes),
        Some(MeshFormat::StlAscii) => stl::parse_ascii(bytes),
        Some(MeshFormat::Obj) => obj::parse(bytes),
        None => {
            let ascii_err = if stl::looks_ascii(bytes) {
                match stl::parse_ascii(bytes) {
                    Ok(mesh) => return Ok(mesh),
                    Err(e) => Some(e),
                }
            } else {
                None
            };
            if stl::binary_length_matches(bytes) {
                return stl::parse_binary(bytes);
            }
            if let Some(e) = ascii_err {
                return Err(e);
            }
            if obj::looks_obj(bytes) {
                return obj::parse(bytes);
            }
            Err(MeshIoError::UnknownFormat)
        }
    }
}

/// The format [`load_mesh`] would pick for `bytes`, if any.
pub fn detect_format(bytes: &[u8]) -> Option<MeshFormat> {
    if stl::looks_ascii(bytes) && stl::parse_ascii(bytes).is_ok() {
        Some(MeshFormat::StlAscii)
    } else if stl::binary_length_matches(bytes) {
        Some(MeshFormat::StlBinary)
    } else if obj::looks_obj(bytes) {
        Some(MeshFormat::Obj)
    } else {
        None
    }
}

/// Serializes a non-empty mesh. Face tags are not stored: inner triangles
/// are written as ordinary geometry with their reversed winding.
pub fn save_mesh(mesh: &TriangleMesh, format: MeshFormat) -> Result<Vec<u8>, MeshIoError> {
    if mesh.is_empty() {
        return Err(MeshIoError::EmptyMesh);
    }
    if matches!(format, MeshFormat::StlBinary | MeshFormat::StlAscii) {
        let limit = f32::MAX as f64;
        if let Some(v) = mesh
            .vertices()
            .iter()
            .position(|v| v.to_array().iter().any(|c| c.abs() > limit))
        {
            return Err(MeshIoError::NotRepresentable(v));
        }
    }
    Ok(match format {
        MeshFormat::StlBinary => stl::write_binary(mesh),
        MeshFormat::StlAscii => stl::write_ascii(mesh),
        MeshFormat::Obj => obj::write(mesh),
    })
}

/// Per-triangle unit normals by the right-hand rule on the winding order.
pub fn compute_normals(mesh: &TriangleMesh) -> Vec<FaceNormal> {
    mesh.face_normals()
}
