//! Wire messages and the replicated session state.
//!
//! Each gesture travels as one small [`Payload`] wrapped in an [`Envelope`].
//! The relay stamps envelopes with consecutive sequence numbers, and every
//! [`SharedState`] applies them strictly in that order, so all replicas
//! converge even though rotations do not commute.

mod codec;
mod replica;

use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{GeometryError, PlaneEquation, ScaleFactor, TriangleMesh, UnitQuaternion, UnitVec3, Vec3};
use crate::mesh_io::{save_mesh, MeshFormat};

pub use codec::{decode, encode, encode_matrix_equivalent, DecodeError};
pub(crate) use codec::{
    encode_snapshot_fields, parse_object, snapshot_from_fields, write_message, Fields, StateSyncWire,
};
pub use replica::{apply_envelope, snapshot_of, ApplyOutcome, SharedState, StateSync};

/// Peer identifier assigned by the relay.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PeerId(String);

impl PeerId {
    pub fn new(id: impl Into<String>) -> Self {
        PeerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PeerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PeerId {
    fn from(s: &str) -> Self {
        PeerId(s.to_owned())
    }
}

/// Hex SHA-256 of a mesh blob.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentHash(String);

impl ContentHash {
    pub fn of(bytes: &[u8]) -> Self {
        ContentHash(hex::encode(Sha256::digest(bytes)))
    }

    /// Accepts 64 lowercase hex digits.
    pub fn parse(s: &str) -> Option<Self> {
        (s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))).then(|| ContentHash(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical blob for a mesh (lossless OBJ text) and its content hash.
pub fn mesh_blob(mesh: &TriangleMesh) -> Option<(Vec<u8>, ContentHash)> {
    let bytes = save_mesh(mesh, MeshFormat::Obj).ok()?;
    let hash = ContentHash::of(&bytes);
    Some((bytes, hash))
}

/// The model currently shown in a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshRef {
    pub mesh_id: String,
    pub hash: ContentHash,
}

/// Mesh carried by an import: either inline geometry from the uploader, or
/// the hash of a blob the relay already stores.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshContent {
    Hash(ContentHash),
    Inline(TriangleMesh),
}

/// The saved view: orientation, scale and slicing plane. The anchor is not
/// part of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub orientation: UnitQuaternion,
    pub scale: ScaleFactor,
    pub plane: PlaneEquation,
}

impl Default for Snapshot {
    fn default() -> Self {
        Snapshot {
            orientation: UnitQuaternion::IDENTITY,
            scale: ScaleFactor::new(1.0).expect("1 is a valid scale"),
            plane: PlaneEquation::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Rotation {
        dq: UnitQuaternion,
    },
    Scale {
        factor: ScaleFactor,
    },
    Twist {
        angle: f64,
        axis: UnitVec3,
    },
    /// The full, normalized plane after a plane gesture.
    PlaneUpdate {
        plane: PlaneEquation,
    },
    AnchorSet {
        translation: Vec3,
    },
    SnapshotSave,
    /// Clients send `None` to ask for the last saved view; the relay fills it
    /// in before sequencing.
    SnapshotRestore {
        snapshot: Option<Snapshot>,
    },
    ModelImport {
        mesh_id: String,
        content: MeshContent,
    },
    Join {
        name: String,
    },
    Leave,
}

impl Payload {
    /// Wire `type` tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Rotation { .. } => "rot",
            Payload::Scale { .. } => "scale",
            Payload::Twist { .. } => "twist",
            Payload::PlaneUpdate { .. } => "plane",
            Payload::AnchorSet { .. } => "anchor",
            Payload::SnapshotSave => "save",
            Payload::SnapshotRestore { .. } => "restore",
            Payload::ModelImport { .. } => "import",
            Payload::Join { .. } => "join",
            Payload::Leave => "leave",
        }
    }

    /// Rotation, scale or twist: the gestures a whole-matrix sync would
    /// otherwise have to ship as a full transform.
    pub fn is_transform(&self) -> bool {
        matches!(
            self,
            Payload::Rotation { .. } | Payload::Scale { .. } | Payload::Twist { .. }
        )
    }

    pub fn twist(angle: f64, axis: Vec3) -> Result<Self, GeometryError> {
        if !angle.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(Payload::Twist {
            angle,
            axis: UnitVec3::new(axis)?,
        })
    }

    pub fn scale(factor: f64) -> Result<Self, GeometryError> {
        Ok(Payload::Scale {
            factor: ScaleFactor::new(factor)?,
        })
    }
}

/// A sequenced wire message. `seq == 0` marks a client message that the
/// relay has not stamped yet.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub seq: u64,
    pub sender: PeerId,
    /// Milliseconds since the epoch; informational only.
    pub sent_at: u64,
    pub payload: Payload,
}

impl Envelope {
    pub fn unsequenced(sender: PeerId, sent_at: u64, payload: Payload) -> Self {
        Envelope {
            seq: 0,
            sender,
            sent_at,
            payload,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("sequence number 0 is reserved for unsequenced client messages")]
    UnsequencedEnvelope,
    #[error("restore envelope carries no snapshot")]
    RestoreWithoutSnapshot,
}
