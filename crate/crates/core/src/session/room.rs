use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{ErrorCode, Outbound, RoomId, ServerMessage, SessionConfig};
use crate::protocol::{
    decode, mesh_blob, snapshot_of, ContentHash, Envelope, MeshContent, Payload, PeerId, SharedState,
};
use crate::store::{SnapshotRecord, SnapshotStore};

/// Join refused because the room is full.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoomFull {
    pub capacity: usize,
}

/// One session: the authoritative replica plus its members.
///
/// All handling for a room must be serialized by the caller; every method
/// takes `&mut self` and returns the frames to deliver, in order.
pub struct Room {
    id: RoomId,
    members: BTreeMap<PeerId, String>,
    state: SharedState,
    blobs: HashMap<ContentHash, Arc<[u8]>>,
    next_peer: u64,
    emptied_at: Option<u64>,
    config: SessionConfig,
}

impl Room {
    pub fn new(id: RoomId, config: SessionConfig) -> Self {
        Room {
            id,
            members: BTreeMap::new(),
            state: SharedState::new(config.scale_limits),
            blobs: HashMap::new(),
            next_peer: 1,
            emptied_at: None,
            config,
        }
    }

    pub fn id(&self) -> &RoomId {
        &self.id
    }

    pub fn state(&self) -> &SharedState {
        &self.state
    }

    /// Sequence number the next broadcast will carry.
    pub fn next_seq(&self) -> u64 {
        self.state.last_applied_seq() + 1
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &BTreeMap<PeerId, String> {
        &self.members
    }

    pub fn is_member(&self, peer: &PeerId) -> bool {
        self.members.contains_key(peer)
    }

    /// When the last member left, if the room is empty.
    pub fn emptied_at(&self) -> Option<u64> {
        self.emptied_at
    }

    pub fn blob(&self, hash: &ContentHash) -> Option<Arc<[u8]>> {
        self.blobs.get(hash).cloned()
    }

    /// Stamps the next seq, applies to the authoritative state and returns
    /// the stamped envelope.
    fn sequence(&mut self, sender: PeerId, sent_at: u64, payload: Payload) -> Envelope {
        let env = Envelope {
            seq: self.next_seq(),
            sender,
            sent_at,
            payload,
        };
        self.state
            .apply(env.clone())
            .expect("relay only sequences validated payloads");
        env
    }

    fn broadcast(&self, env: &Envelope, except: Option<&PeerId>) -> Vec<Outbound> {
        self.members
            .keys()
            .filter(|p| Some(*p) != except)
            .map(|p| Outbound {
                to: p.clone(),
                message: ServerMessage::Envelope(env.clone()),
            })
            .collect()
    }

    /// Adds a member. The joiner gets a single welcome carrying the full
    /// state (including its own join); everyone else gets the join envelope.
    pub fn join(&mut self, name: &str, now: u64) -> Result<(PeerId, Vec<Outbound>), RoomFull> {
        if self.members.len() >= self.config.room_capacity {
            return Err(RoomFull {
                capacity: self.config.room_capacity,
            });
        }
        let peer = PeerId::new(format!("p{}", self.next_peer));
        self.next_peer += 1;
        let env = self.sequence(peer.clone(), now, Payload::Join { name: name.to_owned() });
        let mut out = self.broadcast(&env, None);
        self.members.insert(peer.clone(), name.to_owned());
        self.emptied_at = None;
        out.push(Outbound {
            to: peer.clone(),
            message: ServerMessage::Welcome {
                peer_id: peer.clone(),
                sync: self.state.to_sync(),
            },
        });
        Ok((peer, out))
    }

    /// Removes a member (clean leave or dropped connection) and tells the
    /// others with a sequenced leave envelope.
    pub fn leave(&mut self, peer: &PeerId, now: u64) -> Vec<Outbound> {
        if self.members.remove(peer).is_none() {
            return Vec::new();
        }
        let env = self.sequence(peer.clone(), now, Payload::Leave);
        if self.members.is_empty() {
            self.emptied_at = Some(now);
        }
        self.broadcast(&env, None)
    }

    fn error_to(peer: &PeerId, code: ErrorCode, message: impl Into<String>) -> Vec<Outbound> {
        vec![Outbound {
            to: peer.clone(),
            message: ServerMessage::Error {
                code,
                message: message.into(),
            },
        }]
    }

    /// Decodes one client frame and handles it. Undecodable frames get an
    /// error back to the sender and consume no sequence number.
    pub fn handle_frame(
        &mut self,
        peer: &PeerId,
        frame: &[u8],
        now: u64,
        store: Option<&dyn SnapshotStore>,
    ) -> Vec<Outbound> {
        if !self.is_member(peer) {
            return Self::error_to(peer, ErrorCode::NotMember, "not a member of this room");
        }
        match decode(frame) {
            Ok(env) if env.seq != 0 => Self::error_to(peer, ErrorCode::Malformed, "client messages must carry seq 0"),
            Ok(env) => self.handle_client_message(peer, env.sent_at, env.payload, now, store),
            Err(e) => Self::error_to(peer, ErrorCode::Malformed, e.to_string()),
        }
    }

    /// Sequences a member's payload and broadcasts it to every member,
    /// sender included.
    pub fn handle_client_message(
        &mut self,
        peer: &PeerId,
        sent_at: u64,
        payload: Payload,
        now: u64,
        store: Option<&dyn SnapshotStore>,
    ) -> Vec<Outbound> {
        if !self.is_member(peer) {
            return Self::error_to(peer, ErrorCode::NotMember, "not a member of this room");
        }
        let payload = match payload {
            Payload::Join { .. } | Payload::Leave => {
                return Self::error_to(peer, ErrorCode::Forbidden, "membership is managed by the relay")
            }
            Payload::SnapshotSave => {
                if let Some(store) = store {
                    let record = SnapshotRecord {
                        room_id: self.id.clone(),
                        saved_at: now,
                        snapshot: snapshot_of(&self.state),
                    };
                    if let Err(e) = store.store(&record) {
                        return Self::error_to(peer, ErrorCode::SaveFailed, e.to_string());
                    }
                }
                Payload::SnapshotSave
            }
            Payload::SnapshotRestore { snapshot: None } => {
                let saved = match self.state.saved() {
                    Some(s) => Some(*s),
                    None => match store.map(|s| s.load(&self.id)).transpose() {
                        Ok(found) => found.flatten().map(|r| r.snapshot),
                        Err(e) => return Self::error_to(peer, ErrorCode::RestoreFailed, e.to_string()),
                    },
                };
                match saved {
                    Some(s) => Payload::SnapshotRestore { snapshot: Some(s) },
                    None => return Self::error_to(peer, ErrorCode::NothingSaved, "no saved state to restore"),
                }
            }
            Payload::ModelImport { mesh_id, content } => {
                let hash = match content {
                    MeshContent::Inline(mesh) => match mesh_blob(&mesh) {
                        Some((bytes, hash)) => {
                            self.blobs.insert(hash.clone(), bytes.into());
                            hash
                        }
                        None => return Self::error_to(peer, ErrorCode::Malformed, "imported mesh is empty"),
                    },
                    MeshContent::Hash(hash) if self.blobs.contains_key(&hash) => hash,
                    MeshContent::Hash(hash) => {
                        return Self::error_to(peer, ErrorCode::UnknownMesh, format!("no blob with hash {hash}"))
                    }
                };
                Payload::ModelImport {
                    mesh_id,
                    content: MeshContent::Hash(hash),
                }
            }
            other => other,
        };
        let env = self.sequence(peer.clone(), sent_at, payload);
        self.broadcast(&env, None)
    }
}
