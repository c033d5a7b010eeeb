use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use super::{InvalidRoomId, Outbound, Room, RoomFull, RoomId, SessionConfig};
use crate::protocol::{ContentHash, Payload, PeerId};
use crate::store::SnapshotStore;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JoinError {
    #[error(transparent)]
    InvalidRoom(#[from] InvalidRoomId),
    #[error("room is full ({} members)", .0.capacity)]
    Full(RoomFull),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoomSummary {
    pub room_id: RoomId,
    pub members: usize,
}

/// Single-threaded registry of rooms. The simulator and tests drive it
/// directly; the network server keeps its own concurrent map of [`Room`]s.
pub struct Lobby {
    rooms: BTreeMap<RoomId, Room>,
    config: SessionConfig,
    store: Option<Arc<dyn SnapshotStore>>,
}

impl Lobby {
    pub fn new(config: SessionConfig, store: Option<Arc<dyn SnapshotStore>>) -> Self {
        Lobby {
            rooms: BTreeMap::new(),
            config,
            store,
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn room(&self, id: &RoomId) -> Option<&Room> {
        self.rooms.get(id)
    }

    /// Joins `room_id`, creating the room if needed.
    pub fn handle_join(
        &mut self,
        room_id: &str,
        name: &str,
        now: u64,
    ) -> Result<(RoomId, PeerId, Vec<Outbound>), JoinError> {
        let id = RoomId::new(room_id)?;
        let config = self.config;
        let room = self
            .rooms
            .entry(id.clone())
            .or_insert_with(|| Room::new(id.clone(), config));
        let (peer, out) = room.join(name, now).map_err(JoinError::Full)?;
        Ok((id, peer, out))
    }

    /// Handles an encoded client frame. Unknown rooms produce nothing.
    pub fn handle_frame(&mut self, room_id: &RoomId, peer: &PeerId, frame: &[u8], now: u64) -> Vec<Outbound> {
        let store = self.store.as_deref();
        match self.rooms.get_mut(room_id) {
            Some(room) => room.handle_frame(peer, frame, now, store),
            None => Vec::new(),
        }
    }

    pub fn handle_client_message(
        &mut self,
        room_id: &RoomId,
        peer: &PeerId,
        sent_at: u64,
        payload: Payload,
        now: u64,
    ) -> Vec<Outbound> {
        let store = self.store.as_deref();
        match self.rooms.get_mut(room_id) {
            Some(room) => room.handle_client_message(peer, sent_at, payload, now, store),
            None => Vec::new(),
        }
    }

    /// Clean leave or dropped connection.
    pub fn handle_disconnect(&mut self, room_id: &RoomId, peer: &PeerId, now: u64) -> Vec<Outbound> {
        match self.rooms.get_mut(room_id) {
            Some(room) => room.leave(peer, now),
            None => Vec::new(),
        }
    }

    /// Active rooms and their member counts, ordered by id. Rooms that are
    /// empty but still inside their grace period are listed with 0.
    pub fn lobby_list(&self) -> Vec<RoomSummary> {
        self.rooms
            .values()
            .map(|r| RoomSummary {
                room_id: r.id().clone(),
                members: r.member_count(),
            })
            .collect()
    }

    /// Drops rooms that have been empty for at least the grace period.
    pub fn prune(&mut self, now: u64) -> Vec<RoomId> {
        let grace = self.config.empty_room_grace_ms;
        let expired: Vec<RoomId> = self
            .rooms
            .values()
            .filter(|r| r.emptied_at().is_some_and(|t| now.saturating_sub(t) >= grace))
            .map(|r| r.id().clone())
            .collect();
        for id in &expired {
            self.rooms.remove(id);
        }
        expired
    }

    pub fn blob(&self, hash: &ContentHash) -> Option<Arc<[u8]>> {
        self.rooms.values().find_map(|r| r.blob(hash))
    }

    /// One-line status: `ok rooms=<n> members=<m>`.
    pub fn health_line(&self) -> String {
        let members: usize = self.rooms.values().map(Room::member_count).sum();
        format!("ok rooms={} members={}", self.rooms.len(), members)
    }
}
