#![no_main]

use coview_core::mesh_io::{load_mesh, save_mesh, MeshFormat, MeshIoError};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    for fmt in [
        None,
        Some(MeshFormat::StlBinary),
        Some(MeshFormat::StlAscii),
        Some(MeshFormat::Obj),
    ] {
        let Ok(mesh) = load_mesh(data, fmt) else { continue };
        // A file with no facets loads fine but cannot be written back.
        let bytes = match save_mesh(&mesh, MeshFormat::Obj) {
            Ok(b) => b,
            Err(e) => {
                assert_eq!(e, MeshIoError::EmptyMesh);
                assert!(mesh.is_empty());
                continue;
            }
        };
        // OBJ output is lossless, so anything we accept must survive it.
        assert_eq!(load_mesh(&bytes, Some(MeshFormat::Obj)).unwrap(), mesh);
    }
});
