use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Location, MeshFormat, MeshIoError};
use crate::geometry::{TriangleMesh, Vec3};

const HEADER_LEN: usize = 80;
const FACET_LEN: usize = 50;
const BINARY_HEADER: &[u8] = b"coview binary STL";

pub(super) fn looks_ascii(bytes: &[u8]) -> bool {
    bytes.starts_with(b"solid") && bytes.get(5).is_none_or(|b| b.is_ascii_whitespace())
}

pub(super) fn binary_length_matches(bytes: &[u8]) -> bool {
    if bytes.len() < HEADER_LEN + 4 {
        return false;
    }
    let count = read_u32(bytes, HEADER_LEN) as u64;
    (HEADER_LEN + 4) as u64 + count * FACET_LEN as u64 == bytes.len() as u64
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

fn read_f32(bytes: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

/// Welds vertices whose coordinates are bit-identical.
struct Welder<K> {
    index: HashMap<K, u32>,
    vertices: Vec<Vec3>,
}

impl<K: std::hash::Hash + Eq> Welder<K> {
    fn new() -> Self {
        Welder {
            index: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn insert(&mut self, key: K, v: Vec3) -> u32 {
        let next = self.vertices.len() as u32;
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(v);
            next
        })
    }
}

pub(super) fn parse_binary(bytes: &[u8]) -> Result<TriangleMesh, MeshIoError> {
    let fmt = MeshFormat::StlBinary;
    if bytes.len() < HEADER_LEN + 4 {
        return Err(MeshIoError::parse(
            fmt,
            Location::Byte(bytes.len()),
            format!("truncated header: need {} bytes", HEADER_LEN + 4),
        ));
    }
    let count = read_u32(bytes, HEADER_LEN) as usize;
    let available = (bytes.len() - HEADER_LEN - 4) / FACET_LEN;
    let mut welder = Welder::<[u32; 3]>::new();
    let mut triangles = Vec::with_capacity(count.min(available));
    for i in 0..count {
        let start = HEADER_LEN + 4 + i * FACET_LEN;
        if start + FACET_LEN > bytes.len() {
            return Err(MeshIoError::parse(
                fmt,
                Location::Byte(start),
                format!("truncated facet record {i} of {count}"),
            ));
        }
        let mut tri = [0u32; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let at = start + 12 + 12 * k;
            let c = [read_f32(bytes, at), read_f32(bytes, at + 4), read_f32(bytes, at + 8)];
            if c.iter().any(|x| !x.is_finite()) {
                return Err(MeshIoError::parse(
                    fmt,
                    Location::Byte(at),
                    "non-finite vertex coordinate",
                ));
            }
            let key = c.map(f32::to_bits);
            *slot = welder.insert(key, Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64));
        }
        triangles.push(tri);
    }
    Ok(TriangleMesh::new(welder.vertices, triangles).expect("welded indices are in range"))
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Tokens { bytes, pos: 0, line: 1 }
    }

    fn skip_ws(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'\n' {
                self.line += 1;
            } else if !b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Option<(&'a [u8], usize)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| (&self.bytes[start..self.pos], self.line))
    }

    /// Skips the remainder of the current line.
    fn rest_of_line(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'\n' {
                break;
            }
            self.pos += 1;
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> MeshIoError {
        MeshIoError::parse(MeshFormat::StlAscii, Location::Line(line), message)
    }

    fn expect(&mut self, word: &str) -> Result<(), MeshIoError> {
        match self.next() {
            Some((tok, _)) if tok == word.as_bytes() => Ok(()),
            Some((tok, line)) => Err(self.err(
                line,
                format!("expected `{word}`, found `{}`", String::from_utf8_lossy(tok)),
            )),
            None => Err(self.err(self.line, format!("unexpected end of input, expected `{word}`"))),
        }
    }

    fn number(&mut self) -> Result<f64, MeshIoError> {
        let Some((tok, line)) = self.next() else {
            return Err(self.err(self.line, "unexpected end of input, expected a number"));
        };
        let v = std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| self.err(line, format!("invalid number `{}`", String::from_utf8_lossy(tok))))?;
        if !v.is_finite() {
            return Err(self.err(line, "non-finite number"));
        }
        Ok(v)
    }
}

pub(super) fn parse_ascii(bytes: &[u8]) -> Result<TriangleMesh, MeshIoError> {
    let mut toks = Tokens::new(bytes);
    let mut welder = Welder::<[u64; 3]>::new();
    let mut triangles = Vec::new();
    toks.expect("solid")?;
    toks.rest_of_line();
    loop {
        let Some((tok, line)) = toks.next() else {
            return Err(toks.err(toks.line, "unexpected end of input, expected `endsolid`"));
        };
        match tok {
            b"facet" => {
                toks.expect("normal")?;
                for _ in 0..3 {
                    toks.number()?;
                }
                toks.expect("outer")?;
                toks.expect("loop")?;
                let mut tri = [0u32; 3];
                for slot in &mut tri {
                    toks.expect("vertex")?;
                    let v = Vec3::new(toks.number()?, toks.number()?, toks.number()?);
                    *slot = welder.insert(v.to_array().map(f64::to_bits), v);
                }
                toks.expect("endloop")?;
                toks.expect("endfacet")?;
                triangles.push(tri);
            }
            b"endsolid" => {
                toks.rest_of_line();
                // Several solids may be concatenated in one file.
                match toks.next() {
                    None => break,
                    Some((b"solid", _)) => toks.rest_of_line(),
                    Some((tok, line)) => {
                        return Err(toks.err(
                            line,
                            format!("unexpected `{}` after endsolid", String::from_utf8_lossy(tok)),
                        ))
                    }
                }
            }
            other => {
                return Err(toks.err(
                    line,
                    format!(
                        "expected `facet` or `endsolid`, found `{}`",
                        String::from_utf8_lossy(other)
                    ),
                ))
            }
        }
    }
    Ok(TriangleMesh::new(welder.vertices, triangles).expect("welded indices are in range"))
}

fn facet_normals(mesh: &TriangleMesh) -> Vec<Vec3> {
    mesh.face_normals().into_iter().map(|n| n.vector()).collect()
}

pub(super) fn write_binary(mesh: &TriangleMesh) -> Vec<u8> {
    let n = mesh.triangle_count();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + n * FACET_LEN);
    out.extend_from_slice(BINARY_HEADER);
    out.resize(HEADER_LEN, 0);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for (t, normal) in facet_normals(mesh).into_iter().enumerate() {
        let corners = mesh.corners(t);
        for v in std::iter::once(normal).chain(corners) {
            for c in v.to_array() {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

pub(super) fn write_ascii(mesh: &TriangleMesh) -> Vec<u8> {
    let mut s = String::from("solid coview\n");
    for (t, n) in facet_normals(mesh).into_iter().enumerate() {
        let _ = writeln!(s, "  facet normal {} {} {}", n.x as f32, n.y as f32, n.z as f32);
        s.push_str("    outer loop\n");
        for v in mesh.corners(t) {
            let _ = writeln!(s, "      vertex {} {} {}", v.x as f32, v.y as f32, v.z as f32);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    s.push_str("endsolid coview\n");
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_errors_name_the_line() {
        let text = b"solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0 zz\n";
        let err = parse_ascii(text).unwrap_err();
        assert_eq!(err.location(), Some(Location::Line(4)));
        let err = parse_ascii(b"solid x\n  facet normal 0 0 1\n").unwrap_err();
        assert!(matches!(err, MeshIoError::Parse { .. }));
    }

    #[test]
    fn ascii_accepts_empty_and_concatenated_solids() {
        assert!(parse_ascii(b"solid empty\nendsolid empty\n").unwrap().is_empty());
        let one = "facet normal 0 0 1 outer loop vertex 0 0 0 vertex 1 0 0 vertex 0 1 0 endloop endfacet";
        let text = format!("solid a\n{one}\nendsolid a\nsolid b\n{one}\nendsolid b\n");
        let m = parse_ascii(text.as_bytes()).unwrap();
        assert_eq!(m.triangle_count(), 2);
        assert_eq!(m.vertices().len(), 3);
    }

    #[test]
    fn binary_header_starting_with_solid_is_still_binary() {
        let mut bytes = vec![0u8; 84];
        bytes[..6].copy_from_slice(b"solid ");
        assert!(looks_ascii(&bytes));
        assert!(binary_length_matches(&bytes));
        assert!(super::super::load_mesh(&bytes, None).unwrap().is_empty());
    }

    #[test]
    fn huge_declared_count_fails_without_allocating() {
        let mut bytes = vec![0u8; 84];
        bytes[80..84].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(parse_binary(&bytes).is_err());
    }
}
