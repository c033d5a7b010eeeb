use std::fmt::Write as _;

use super::{Location, MeshFormat, MeshIoError};
use crate::geometry::{TriangleMesh, Vec3};

const FMT: MeshFormat = MeshFormat::Obj;

pub(super) fn looks_obj(bytes: &[u8]) -> bool {
    bytes.split(|&b| b == b'\n').any(|line| {
        let line = line.trim_ascii_start();
        line.starts_with(b"v ") || line.starts_with(b"f ") || line.starts_with(b"v\t") || line.starts_with(b"f\t")
    })
}

fn err(line: usize, message: impl Into<String>) -> MeshIoError {
    MeshIoError::parse(FMT, Location::Line(line), message)
}

/// Parses `v` and `f` records; every other record type is skipped.
pub(super) fn parse(bytes: &[u8]) -> Result<TriangleMesh, MeshIoError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| MeshIoError::parse(FMT, Location::Byte(e.valid_up_to()), "invalid UTF-8"))?;
    let mut vertices = Vec::new();
    // (line, one-based indices) per face, resolved once all vertices are known.
    let mut faces: Vec<(usize, Vec<i64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let mut fields = line.split_ascii_whitespace();
        match fields.next() {
            Some("v") => {
                let nums: Vec<f64> = fields
                    .map(|f| {
                        f.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| err(line_no, format!("invalid coordinate `{f}`")))
                    })
                    .collect::<Result<_, _>>()?;
                // An optional fourth (w) component is tolerated and ignored.
                if !(3..=4).contains(&nums.len()) {
                    return Err(err(line_no, format!("expected 3 coordinates, found {}", nums.len())));
                }
                vertices.push(Vec3::new(nums[0], nums[1], nums[2]));
            }
            Some("f") => {
                let idx: Vec<i64> = fields
                    .map(|f| {
                        let head = f.split('/').next().unwrap_or("");
                        head.parse::<i64>()
                            .map_err(|_| err(line_no, format!("invalid face index `{f}`")))
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(err(
                        line_no,
                        format!("face needs at least 3 indices, found {}", idx.len()),
                    ));
                }
                faces.push((line_no, idx));
            }
            _ => {}
        }
    }
    let count = vertices.len();
    let mut triangles = Vec::new();
    for (line_no, idx) in faces {
        let resolved: Vec<u32> = idx
            .iter()
            .map(|&i| {
                if i >= 1 && (i as u64) <= count as u64 {
                    Ok((i - 1) as u32)
                } else {
                    Err(MeshIoError::IndexOutOfRange {
                        format: FMT,
                        location: Location::Line(line_no),
                        index: i,
                        vertex_count: count,
                    })
                }
            })
            .collect::<Result<_, _>>()?;
        for k in 1..resolved.len() - 1 {
            triangles.push([resolved[0], resolved[k], resolved[k + 1]]);
        }
    }
    Ok(TriangleMesh::new(vertices, triangles).expect("indices checked above"))
}

pub(super) fn write(mesh: &TriangleMesh) -> Vec<u8> {
    let mut s = String::from("# coview\n");
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for [i, j, k] in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", i + 1, j + 1, k + 1);
    }
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ignores_suffixes_comments_and_other_records() {
        let text =
            b"# comment\nmtllib a.mtl\no heart\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nvt 0 0\nv 0 1 0 1.0\nf 1/1/1 2//1 3/2\n";
        let m = parse(text).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn zero_and_negative_indices_are_out_of_range() {
        for face in ["f 0 1 2", "f -1 1 2"] {
            let text = format!("v 0 0 0\nv 1 0 0\nv 0 1 0\n{face}\n");
            assert!(matches!(
                parse(text.as_bytes()),
                Err(MeshIoError::IndexOutOfRange {
                    location: Location::Line(4),
                    ..
                })
            ));
        }
    }

    #[test]
    fn malformed_records() {
        assert_eq!(parse(b"v 1 2\n").unwrap_err().location(), Some(Location::Line(1)));
        assert_eq!(
            parse(b"v 0 0 0\nf 1 2\n").unwrap_err().location(),
            Some(Location::Line(2))
        );
        assert_eq!(parse(b"v 0 0 nan\n").unwrap_err().location(), Some(Location::Line(1)));
        assert_eq!(parse(b"v 0 0 0\n\xff").unwrap_err().location(), Some(Location::Byte(8)));
    }
}
