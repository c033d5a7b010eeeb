mod common;

use common::fixture;
use coview_core::geometry::TriangleMesh;
use coview_core::mesh_io::{detect_format, load_mesh, save_mesh, Location, MeshFormat, MeshIoError};

/// STL has no shared vertex list, so compare triangle corners in order.
fn max_rel_diff(a: &TriangleMesh, b: &TriangleMesh) -> f64 {
    assert_eq!(a.triangle_count(), b.triangle_count());
    (0..a.triangle_count())
        .flat_map(|t| a.corners(t).into_iter().zip(b.corners(t)))
        .map(|(p, q)| p.max_abs_diff(q) / p.norm().max(1.0))
        .fold(0.0, f64::max)
}

#[test]
fn binary_stl_fixture_loads_and_welds() {
    let bytes = fixture("torus.stl");
    assert_eq!(detect_format(&bytes), Some(MeshFormat::StlBinary));
    let mesh = load_mesh(&bytes, None).unwrap();
    assert_eq!(mesh.triangle_count(), 256);
    assert_eq!(mesh.vertices().len(), 128);
    assert!(mesh.face_normals().iter().all(|n| !n.is_degenerate()));
}

#[test]
fn ascii_stl_fixture_loads() {
    let bytes = fixture("octahedron.stl");
    assert_eq!(detect_format(&bytes), Some(MeshFormat::StlAscii));
    let mesh = load_mesh(&bytes, None).unwrap();
    assert_eq!(mesh.triangle_count(), 8);
    assert_eq!(mesh.vertices().len(), 6);
    let bb = mesh.bounding_box().unwrap();
    assert_eq!(bb.diagonal(), (3.0f64 * 400.0).sqrt());
}

#[test]
fn obj_quads_are_triangulated_with_outward_normals() {
    let mesh = load_mesh(&fixture("cube.obj"), Some(MeshFormat::Obj)).unwrap();
    assert_eq!(mesh.triangle_count(), 12);
    assert_eq!(mesh.vertices().len(), 8);
    let center = mesh.bounding_box().unwrap().center();
    for (t, n) in mesh.face_normals().into_iter().enumerate() {
        assert!(
            n.vector().dot(mesh.centroid(t) - center) > 0.0,
            "triangle {t} faces inward"
        );
    }
}

#[test]
fn each_format_roundtrips_within_its_contract() {
    for name in ["torus.stl", "octahedron.stl", "cube.obj"] {
        let mesh = load_mesh(&fixture(name), None).unwrap();
        let obj = load_mesh(&save_mesh(&mesh, MeshFormat::Obj).unwrap(), None).unwrap();
        assert_eq!(obj, mesh, "{name}: OBJ is lossless");
        for fmt in [MeshFormat::StlBinary, MeshFormat::StlAscii] {
            let bytes = save_mesh(&mesh, fmt).unwrap();
            assert_eq!(detect_format(&bytes), Some(fmt));
            let back = load_mesh(&bytes, None).unwrap();
            assert!(max_rel_diff(&mesh, &back) <= 1e-6, "{name} via {fmt}");
        }
    }
}

#[test]
fn truncated_binary_stl_reports_facet_offset() {
    let bytes = fixture("torus.stl");
    let cut = &bytes[..84 + 50 * 10 + 17];
    let err = load_mesh(cut, Some(MeshFormat::StlBinary)).unwrap_err();
    assert_eq!(err.location(), Some(Location::Byte(84 + 50 * 10)), "{err}");
}

#[test]
fn obj_face_past_vertex_count_names_the_line() {
    let mut text = String::from_utf8(fixture("cube.obj")).unwrap();
    text.push_str("f 1 2 9\n");
    let lines = text.lines().count();
    match load_mesh(text.as_bytes(), None).unwrap_err() {
        MeshIoError::IndexOutOfRange { location, index, .. } => {
            assert_eq!(location, Location::Line(lines));
            assert_eq!(index, 9);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn garbage_is_rejected() {
    assert_eq!(load_mesh(b"", None), Err(MeshIoError::EmptyInput));
    assert_eq!(load_mesh(b"\x00\x01 not a mesh", None), Err(MeshIoError::UnknownFormat));
}
