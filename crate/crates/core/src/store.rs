//! Snapshot persistence: one live record per room, stored as
//! `<dir>/<room_id>.snapshot` in the same text format as the wire snapshot
//! body, plus `room_id` and `saved_at`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::protocol::{encode_snapshot_fields, parse_object, snapshot_from_fields, DecodeError, Fields, Snapshot};
use crate::session::RoomId;

const EXTENSION: &str = "snapshot";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub room_id: RoomId,
    /// Milliseconds since the epoch.
    pub saved_at: u64,
    pub snapshot: Snapshot,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("snapshot storage unavailable at {path}: {source}")]
    Unavailable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt snapshot record {path}: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: DecodeError,
    },
}

#[derive(Serialize)]
struct RecordOut<'a> {
    room_id: &'a str,
    saved_at: u64,
    #[serde(flatten)]
    snapshot: Value,
}

pub fn encode_record(r: &SnapshotRecord) -> Vec<u8> {
    let out = RecordOut {
        room_id: r.room_id.as_str(),
        saved_at: r.saved_at,
        snapshot: encode_snapshot_fields(&r.snapshot),
    };
    let mut bytes = serde_json::to_vec(&out).expect("record is serializable");
    bytes.push(b'\n');
    bytes
}

pub fn decode_record(bytes: &[u8]) -> Result<SnapshotRecord, DecodeError> {
    let map = parse_object(bytes)?;
    let f = Fields::new(&map, "");
    let room = f.str("room_id")?;
    let room_id = RoomId::new(room).map_err(|e| f.invalid("room_id", e))?;
    Ok(SnapshotRecord {
        room_id,
        saved_at: f.u64("saved_at")?,
        snapshot: snapshot_from_fields(&f)?,
    })
}

/// Single-slot snapshot storage keyed by room.
pub trait SnapshotStore: Send + Sync {
    /// Writes `record`, replacing any earlier one for the same room, and
    /// returns the key it was stored under.
    fn store(&self, record: &SnapshotRecord) -> Result<String, StoreError>;
    fn load(&self, room_id: &RoomId) -> Result<Option<SnapshotRecord>, StoreError>;
    fn list(&self) -> Result<Vec<RoomId>, StoreError>;
}

/// File-per-room store under one directory.
#[derive(Debug, Clone)]
pub struct FileStore {
    dir: PathBuf,
}

impl FileStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FileStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, room_id: &RoomId) -> PathBuf {
        self.dir.join(format!("{}.{EXTENSION}", room_id.as_str()))
    }
}

fn unavailable(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Unavailable {
        path: path.to_owned(),
        source,
    }
}

impl SnapshotStore for FileStore {
    fn store(&self, record: &SnapshotRecord) -> Result<String, StoreError> {
        fs::create_dir_all(&self.dir).map_err(unavailable(&self.dir))?;
        let path = self.path_for(&record.room_id);
        let tmp = path.with_extension(format!("{EXTENSION}.tmp"));
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&encode_record(record))?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        };
        write().map_err(unavailable(&path))?;
        Ok(path.to_string_lossy().into_owned())
    }

    fn load(&self, room_id: &RoomId) -> Result<Option<SnapshotRecord>, StoreError> {
        let path = self.path_for(room_id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(unavailable(&path)(e)),
        };
        decode_record(&bytes)
            .map(Some)
            .map_err(|source| StoreError::Corrupt { path, source })
    }

    fn list(&self) -> Result<Vec<RoomId>, StoreError> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(unavailable(&self.dir)(e)),
        };
        let mut rooms: Vec<RoomId> = entries
            .filter_map(Result::ok)
            .filter_map(|e| {
                let p = e.path();
                (p.extension()? == EXTENSION)
                    .then(|| RoomId::new(p.file_stem()?.to_str()?).ok())
                    .flatten()
            })
            .collect();
        rooms.sort();
        Ok(rooms)
    }
}

/// In-memory store holding encoded records, for tests and the simulator.
#[derive(Debug, Default)]
pub struct MemoryStore {
    records: Mutex<HashMap<RoomId, Vec<u8>>>,
}

impl SnapshotStore for MemoryStore {
    fn store(&self, record: &SnapshotRecord) -> Result<String, StoreError> {
        let mut records = self.records.lock().expect("store lock poisoned");
        records.insert(record.room_id.clone(), encode_record(record));
        Ok(record.room_id.as_str().to_owned())
    }

    fn load(&self, room_id: &RoomId) -> Result<Option<SnapshotRecord>, StoreError> {
        let records = self.records.lock().expect("store lock poisoned");
        records
            .get(room_id)
            .map(|b| {
                decode_record(b).map_err(|source| StoreError::Corrupt {
                    path: PathBuf::from(room_id.as_str()),
                    source,
                })
            })
            .transpose()
    }

    fn list(&self) -> Result<Vec<RoomId>, StoreError> {
        let mut rooms: Vec<RoomId> = self
            .records
            .lock()
            .expect("store lock poisoned")
            .keys()
            .cloned()
            .collect();
        rooms.sort();
        Ok(rooms)
    }
}
