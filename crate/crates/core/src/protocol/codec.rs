//! Canonical text encoding: one JSON object per message,
//! `{"seq":…,"sender":…,"ts":…,"type":…,"body":{…}}`.
//!
//! Reals are written in shortest round-trip form (at most 17 significant
//! digits), so decoding reproduces every `f64` exactly.

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::{ContentHash, Envelope, MeshContent, MeshRef, Payload, PeerId, Snapshot, StateSync};
use crate::geometry::{GeometryError, Mat4, PlaneEquation, ScaleFactor, TriangleMesh, UnitQuaternion, UnitVec3, Vec3};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("message is not a JSON object")]
    NotAnObject,
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("field `{field}` must be {expected}")]
    WrongType { field: String, expected: &'static str },
    #[error("unknown message type `{0}`")]
    UnknownType(String),
    #[error("field `{0}` is not finite")]
    NonFinite(String),
    #[error("field `{field}`: {reason}")]
    InvalidValue { field: String, reason: String },
}

impl DecodeError {
    /// The dotted path of the offending field, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            DecodeError::MissingField(f) | DecodeError::NonFinite(f) => Some(f),
            DecodeError::WrongType { field, .. } | DecodeError::InvalidValue { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Serialize)]
struct WireOut<'a> {
    seq: u64,
    sender: &'a str,
    ts: u64,
    #[serde(rename = "type")]
    kind: &'a str,
    body: Value,
}

pub(crate) fn write_message(seq: u64, sender: &str, ts: u64, kind: &str, body: Value) -> Vec<u8> {
    let out = WireOut {
        seq,
        sender,
        ts,
        kind,
        body,
    };
    serde_json::to_vec(&out).expect("wire values are always serializable")
}

pub(crate) fn encode_snapshot_fields(s: &Snapshot) -> Value {
    json!({
        "orientation": s.orientation.to_array(),
        "scale": s.scale.get(),
        "plane": s.plane.to_array(),
    })
}

fn body_of(payload: &Payload) -> Value {
    match payload {
        Payload::Rotation { dq } => json!({ "dq": dq.to_array() }),
        Payload::Scale { factor } => json!({ "factor": factor.get() }),
        Payload::Twist { angle, axis } => json!({ "angle": angle, "axis": axis.get().to_array() }),
        Payload::PlaneUpdate { plane } => {
            let [a, b, c, d] = plane.to_array();
            json!({ "a": a, "b": b, "c": c, "d": d })
        }
        Payload::AnchorSet { translation } => json!({ "t": translation.to_array() }),
        Payload::SnapshotSave | Payload::Leave => json!({}),
        Payload::SnapshotRestore { snapshot: None } => json!({}),
        Payload::SnapshotRestore { snapshot: Some(s) } => json!({ "snapshot": encode_snapshot_fields(s) }),
        Payload::ModelImport { mesh_id, content } => match content {
            MeshContent::Hash(h) => json!({ "id": mesh_id, "hash": h.as_str() }),
            MeshContent::Inline(mesh) => {
                let vertices: Vec<f64> = mesh.vertices().iter().flat_map(|v| v.to_array()).collect();
                let triangles: Vec<u32> = mesh.triangles().iter().flatten().copied().collect();
                json!({ "id": mesh_id, "vertices": vertices, "triangles": triangles })
            }
        },
        Payload::Join { name } => json!({ "name": name }),
    }
}

pub fn encode(e: &Envelope) -> Vec<u8> {
    write_message(
        e.seq,
        e.sender.as_str(),
        e.sent_at,
        e.payload.kind(),
        body_of(&e.payload),
    )
}

/// Encodes the whole-transform message a matrix-based sync would send in
/// place of a gesture delta: same envelope fields and number formatting,
/// body `{"m": [16 reals]}`. Used only for bandwidth comparison.
pub fn encode_matrix_equivalent(seq: u64, sender: &PeerId, sent_at: u64, m: &Mat4) -> Vec<u8> {
    write_message(seq, sender.as_str(), sent_at, "matrix", json!({ "m": m.m }))
}

/// Typed access to the members of one JSON object, producing errors that
/// name the full dotted field path.
pub(crate) struct Fields<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl<'a> Fields<'a> {
    pub(crate) fn new(map: &'a Map<String, Value>, path: &str) -> Self {
        Fields {
            map,
            path: path.to_owned(),
        }
    }

    pub(crate) fn path_of(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_owned()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn wrong(&self, key: &str, expected: &'static str) -> DecodeError {
        DecodeError::WrongType {
            field: self.path_of(key),
            expected,
        }
    }

    pub(crate) fn invalid(&self, key: &str, reason: impl ToString) -> DecodeError {
        DecodeError::InvalidValue {
            field: self.path_of(key),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub(crate) fn get(&self, key: &str) -> Result<&'a Value, DecodeError> {
        self.map
            .get(key)
            .ok_or_else(|| DecodeError::MissingField(self.path_of(key)))
    }

    pub(crate) fn u64(&self, key: &str) -> Result<u64, DecodeError> {
        self.get(key)?
            .as_u64()
            .ok_or_else(|| self.wrong(key, "an unsigned integer"))
    }

    pub(crate) fn str(&self, key: &str) -> Result<&'a str, DecodeError> {
        self.get(key)?.as_str().ok_or_else(|| self.wrong(key, "a string"))
    }

    pub(crate) fn f64(&self, key: &str) -> Result<f64, DecodeError> {
        let v = self.get(key)?.as_f64().ok_or_else(|| self.wrong(key, "a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DecodeError::NonFinite(self.path_of(key)))
        }
    }

    pub(crate) fn array(&self, key: &str) -> Result<&'a Vec<Value>, DecodeError> {
        self.get(key)?.as_array().ok_or_else(|| self.wrong(key, "an array"))
    }

    pub(crate) fn reals<const N: usize>(&self, key: &str) -> Result<[f64; N], DecodeError> {
        let arr = self.array(key)?;
        if arr.len() != N {
            return Err(self.invalid(key, format!("expected {N} numbers, found {}", arr.len())));
        }
        let mut out = [0.0; N];
        for (o, v) in out.iter_mut().zip(arr) {
            *o = v.as_f64().ok_or_else(|| self.wrong(key, "an array of numbers"))?;
            if !o.is_finite() {
                return Err(DecodeError::NonFinite(self.path_of(key)));
            }
        }
        Ok(out)
    }

    pub(crate) fn object(&self, key: &str) -> Result<Fields<'a>, DecodeError> {
        let map = self.get(key)?.as_object().ok_or_else(|| self.wrong(key, "an object"))?;
        Ok(Fields::new(map, &self.path_of(key)))
    }

    pub(crate) fn geometry<T>(&self, key: &str, r: Result<T, GeometryError>) -> Result<T, DecodeError> {
        r.map_err(|e| match e {
            GeometryError::NonFinite => DecodeError::NonFinite(self.path_of(key)),
            other => self.invalid(key, other),
        })
    }

    pub(crate) fn quaternion(&self, key: &str) -> Result<UnitQuaternion, DecodeError> {
        let q = self.reals::<4>(key)?;
        self.geometry(key, UnitQuaternion::from_array(q))
    }

    pub(crate) fn plane(&self, key: &str) -> Result<PlaneEquation, DecodeError> {
        let p = self.reals::<4>(key)?;
        self.geometry(key, PlaneEquation::from_array(p))
    }

    pub(crate) fn scale(&self, key: &str) -> Result<ScaleFactor, DecodeError> {
        let s = self.f64(key)?;
        self.geometry(key, ScaleFactor::new(s))
    }

    pub(crate) fn vec3(&self, key: &str) -> Result<Vec3, DecodeError> {
        Ok(Vec3::from_array(self.reals::<3>(key)?))
    }

    pub(crate) fn content_hash(&self, key: &str) -> Result<ContentHash, DecodeError> {
        let s = self.str(key)?;
        ContentHash::parse(s).ok_or_else(|| self.invalid(key, "expected 64 lowercase hex digits"))
    }
}

pub(crate) fn parse_object(bytes: &[u8]) -> Result<Map<String, Value>, DecodeError> {
    match serde_json::from_slice::<Value>(bytes) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(DecodeError::NotAnObject),
        Err(e) => Err(DecodeError::Syntax(e.to_string())),
    }
}

pub(crate) fn snapshot_from_fields(f: &Fields<'_>) -> Result<Snapshot, DecodeError> {
    Ok(Snapshot {
        orientation: f.quaternion("orientation")?,
        scale: f.scale("scale")?,
        plane: f.plane("plane")?,
    })
}

fn inline_mesh(body: &Fields<'_>) -> Result<TriangleMesh, DecodeError> {
    let coords = body.array("vertices")?;
    if coords.len() % 3 != 0 {
        return Err(body.invalid("vertices", "length must be a multiple of 3"));
    }
    let mut flat = Vec::with_capacity(coords.len());
    for c in coords {
        let x = c.as_f64().ok_or_else(|| body.invalid("vertices", "expected numbers"))?;
        if !x.is_finite() {
            return Err(DecodeError::NonFinite(body.path_of("vertices")));
        }
        flat.push(x);
    }
    let vertices = flat.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
    let idx = body.array("triangles")?;
    if idx.len() % 3 != 0 {
        return Err(body.invalid("triangles", "length must be a multiple of 3"));
    }
    let mut ids = Vec::with_capacity(idx.len());
    for i in idx {
        let i = i
            .as_u64()
            .and_then(|i| u32::try_from(i).ok())
            .ok_or_else(|| body.invalid("triangles", "expected vertex indices"))?;
        ids.push(i);
    }
    let triangles = ids.chunks_exact(3).map(|t| [t[0], t[1], t[2]]).collect();
    TriangleMesh::new(vertices, triangles).map_err(|e| body.invalid("triangles", e))
}

fn payload_of(kind: &str, body: &Fields<'_>) -> Result<Payload, DecodeError> {
    Ok(match kind {
        "rot" => Payload::Rotation {
            dq: body.quaternion("dq")?,
        },
        "scale" => Payload::Scale {
            factor: body.scale("factor")?,
        },
        "twist" => {
            let angle = body.f64("angle")?;
            let axis = body.reals::<3>("axis")?;
            Payload::Twist {
                angle,
                axis: body.geometry("axis", UnitVec3::new(Vec3::from_array(axis)))?,
            }
        }
        "plane" => {
            let p = [body.f64("a")?, body.f64("b")?, body.f64("c")?, body.f64("d")?];
            Payload::PlaneUpdate {
                plane: body.geometry("a", PlaneEquation::from_array(p))?,
            }
        }
        "anchor" => Payload::AnchorSet {
            translation: body.vec3("t")?,
        },
        "save" => Payload::SnapshotSave,
        "restore" => Payload::SnapshotRestore {
            snapshot: if body.has("snapshot") {
                Some(snapshot_from_fields(&body.object("snapshot")?)?)
            } else {
                None
            },
        },
        "import" => {
            let mesh_id = body.str("id")?.to_owned();
            let content = if body.has("hash") {
                MeshContent::Hash(body.content_hash("hash")?)
            } else {
                MeshContent::Inline(inline_mesh(body)?)
            };
            Payload::ModelImport { mesh_id, content }
        }
        "join" => Payload::Join {
            name: body.str("name")?.to_owned(),
        },
        "leave" => Payload::Leave,
        other => return Err(DecodeError::UnknownType(other.to_owned())),
    })
}

pub fn decode(bytes: &[u8]) -> Result<Envelope, DecodeError> {
    let map = parse_object(bytes)?;
    let top = Fields::new(&map, "");
    let seq = top.u64("seq")?;
    let sender = PeerId::new(top.str("sender")?);
    let sent_at = top.u64("ts")?;
    let kind = top.str("type")?;
    let body = top.object("body")?;
    let payload = payload_of(kind, &body)?;
    Ok(Envelope {
        seq,
        sender,
        sent_at,
        payload,
    })
}

/// Everything a late joiner needs to start replicating, on the wire.
pub(crate) struct StateSyncWire;

impl StateSyncWire {
    pub(crate) fn to_value(s: &StateSync) -> Value {
        let members: Vec<Value> = s
            .members
            .iter()
            .map(|(id, name)| json!({ "id": id.as_str(), "name": name }))
            .collect();
        let mut v = json!({
            "last_applied_seq": s.last_applied_seq,
            "snapshot": encode_snapshot_fields(&s.snapshot),
            "anchor": s.anchor.to_array(),
            "members": members,
        });
        let obj = v.as_object_mut().expect("object literal");
        if let Some(saved) = &s.saved {
            obj.insert("saved".into(), encode_snapshot_fields(saved));
        }
        if let Some(m) = &s.mesh {
            obj.insert("mesh".into(), json!({ "id": m.mesh_id, "hash": m.hash.as_str() }));
        }
        v
    }

    pub(crate) fn from_fields(f: &Fields<'_>) -> Result<StateSync, DecodeError> {
        let mut members = Vec::new();
        for (i, m) in f.array("members")?.iter().enumerate() {
            let key = format!("members[{i}]");
            let obj = m.as_object().ok_or_else(|| f.invalid(&key, "expected an object"))?;
            let mf = Fields::new(obj, &f.path_of(&key));
            members.push((PeerId::new(mf.str("id")?), mf.str("name")?.to_owned()));
        }
        let saved = if f.has("saved") {
            Some(snapshot_from_fields(&f.object("saved")?)?)
        } else {
            None
        };
        let mesh = if f.has("mesh") {
            let m = f.object("mesh")?;
            Some(MeshRef {
                mesh_id: m.str("id")?.to_owned(),
                hash: m.content_hash("hash")?,
            })
        } else {
            None
        };
        Ok(StateSync {
            last_applied_seq: f.u64("last_applied_seq")?,
            snapshot: snapshot_from_fields(&f.object("snapshot")?)?,
            anchor: f.vec3("anchor")?,
            saved,
            members,
            mesh,
        })
    }
}
