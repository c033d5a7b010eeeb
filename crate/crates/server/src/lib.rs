//! WebSocket front end for the coview relay.
//!
//! Endpoints:
//! - `GET /ws?room=<id>&name=<name>`: join a room; one text frame per message
//! - `GET /blob/<hash>`: mesh blob uploaded to any live room
//! - `GET /rooms`: lobby listing as JSON
//! - `GET /health`: `ok rooms=<n> members=<m>`

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use coview_core::protocol::{ContentHash, PeerId};
use coview_core::session::{
    encode_server_message, InvalidRoomId, Outbound, Room, RoomId, ServerMessage, SessionConfig,
};
use coview_core::store::{FileStore, SnapshotStore};
use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::mpsc;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub session: SessionConfig,
    pub persist_dir: Option<PathBuf>,
    pub prune_interval: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            session: SessionConfig::default(),
            persist_dir: None,
            prune_interval: Duration::from_secs(5),
        }
    }
}

type Outbox = mpsc::UnboundedSender<Vec<u8>>;

struct Slot {
    room: Room,
    conns: HashMap<PeerId, Outbox>,
}

impl Slot {
    fn dispatch(&self, out: Vec<Outbound>, now: u64) {
        for o in out {
            if let Some(tx) = self.conns.get(&o.to) {
                // A closed receiver means the peer is disconnecting; its
                // leave is handled by its own task.
                let _ = tx.send(encode_server_message(&o.message, now));
            }
        }
    }
}

/// Shared relay state. Each room has its own lock, so rooms run in
/// parallel while messages within a room are handled one at a time.
#[derive(Clone)]
pub struct Relay {
    rooms: Arc<Mutex<HashMap<RoomId, Arc<Mutex<Slot>>>>>,
    session: SessionConfig,
    store: Option<Arc<dyn SnapshotStore>>,
}

#[derive(Debug)]
pub enum JoinRefused {
    InvalidRoom(InvalidRoomId),
    Full(usize),
}

impl JoinRefused {
    fn reason(&self) -> String {
        match self {
            JoinRefused::InvalidRoom(e) => e.to_string(),
            JoinRefused::Full(n) => format!("room is full ({n} members)"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RoomListing {
    pub room_id: String,
    pub members: usize,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Relay {
    pub fn new(session: SessionConfig, store: Option<Arc<dyn SnapshotStore>>) -> Self {
        Relay {
            rooms: Arc::default(),
            session,
            store,
        }
    }

    fn slot(&self, id: &RoomId) -> Option<Arc<Mutex<Slot>>> {
        self.rooms.lock().unwrap().get(id).cloned()
    }

    pub fn join(&self, room: &str, name: &str, outbox: Outbox) -> Result<(RoomId, PeerId), JoinRefused> {
        let id = RoomId::new(room).map_err(JoinRefused::InvalidRoom)?;
        let now = now_ms();
        // Keep the map locked until the slot is locked so a concurrent prune
        // cannot drop the room in between.
        let mut rooms = self.rooms.lock().unwrap();
        let slot = rooms
            .entry(id.clone())
            .or_insert_with(|| {
                Arc::new(Mutex::new(Slot {
                    room: Room::new(id.clone(), self.session),
                    conns: HashMap::new(),
                }))
            })
            .clone();
        let mut slot = slot.lock().unwrap();
        drop(rooms);
        let (peer, out) = slot.room.join(name, now).map_err(|f| JoinRefused::Full(f.capacity))?;
        slot.conns.insert(peer.clone(), outbox);
        slot.dispatch(out, now);
        Ok((id, peer))
    }

    pub fn frame(&self, room: &RoomId, peer: &PeerId, bytes: &[u8]) {
        let Some(slot) = self.slot(room) else { return };
        let mut slot = slot.lock().unwrap();
        let now = now_ms();
        let out = slot.room.handle_frame(peer, bytes, now, self.store.as_deref());
        slot.dispatch(out, now);
    }

    pub fn disconnect(&self, room: &RoomId, peer: &PeerId) {
        let Some(slot) = self.slot(room) else { return };
        let mut slot = slot.lock().unwrap();
        slot.conns.remove(peer);
        let now = now_ms();
        let out = slot.room.leave(peer, now);
        slot.dispatch(out, now);
    }

    /// Drops rooms that have been empty for the grace period.
    pub fn prune(&self, now: u64) -> Vec<RoomId> {
        let grace = self.session.empty_room_grace_ms;
        let mut rooms = self.rooms.lock().unwrap();
        let expired: Vec<RoomId> = rooms
            .iter()
            .filter(|(_, s)| {
                let s = s.lock().unwrap();
                s.room.emptied_at().is_some_and(|t| now.saturating_sub(t) >= grace)
            })
            .map(|(id, _)| id.clone())
            .collect();
        for id in &expired {
            rooms.remove(id);
        }
        expired
    }

    pub fn lobby_list(&self) -> Vec<RoomListing> {
        let slots: Vec<(RoomId, Arc<Mutex<Slot>>)> = self
            .rooms
            .lock()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut list: Vec<RoomListing> = slots
            .into_iter()
            .map(|(id, s)| RoomListing {
                room_id: id.to_string(),
                members: s.lock().unwrap().room.member_count(),
            })
            .collect();
        list.sort_by(|a, b| a.room_id.cmp(&b.room_id));
        list
    }

    pub fn health_line(&self) -> String {
        let list = self.lobby_list();
        let members: usize = list.iter().map(|r| r.members).sum();
        format!("ok rooms={} members={}", list.len(), members)
    }

    pub fn blob(&self, hash: &ContentHash) -> Option<Arc<[u8]>> {
        let slots: Vec<_> = self.rooms.lock().unwrap().values().cloned().collect();
        slots.into_iter().find_map(|s| s.lock().unwrap().room.blob(hash))
    }
}

#[derive(Debug, Deserialize)]
struct JoinQuery {
    room: String,
    name: Option<String>,
}

pub fn router(relay: Relay) -> Router {
    Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/health", get(health))
        .route("/rooms", get(rooms))
        .route("/blob/{hash}", get(blob))
        .with_state(relay)
}

async fn health(State(relay): State<Relay>) -> String {
    relay.health_line()
}

async fn rooms(State(relay): State<Relay>) -> Json<Vec<RoomListing>> {
    Json(relay.lobby_list())
}

async fn blob(State(relay): State<Relay>, Path(hash): Path<String>) -> Response {
    let Some(hash) = ContentHash::parse(&hash) else {
        return (StatusCode::BAD_REQUEST, "hash must be 64 lowercase hex digits").into_response();
    };
    match relay.blob(&hash) {
        Some(bytes) => ([(header::CONTENT_TYPE, "text/plain")], bytes.to_vec()).into_response(),
        None => (StatusCode::NOT_FOUND, "unknown blob").into_response(),
    }
}

async fn ws_upgrade(ws: WebSocketUpgrade, Query(q): Query<JoinQuery>, State(relay): State<Relay>) -> Response {
    ws.on_upgrade(move |socket| session(socket, relay, q))
}

async fn session(socket: WebSocket, relay: Relay, q: JoinQuery) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel::<Vec<u8>>();
    let name = q.name.unwrap_or_else(|| "guest".to_owned());
    let (room, peer) = match relay.join(&q.room, &name, tx) {
        Ok(ids) => ids,
        Err(refused) => {
            tracing::info!(room = %q.room, reason = %refused.reason(), "join refused");
            let frame = encode_server_message(
                &ServerMessage::Refused {
                    reason: refused.reason(),
                },
                now_ms(),
            );
            let _ = sink.send(text(frame)).await;
            let _ = sink.close().await;
            return;
        }
    };
    tracing::info!(%room, %peer, %name, "joined");

    let writer = tokio::spawn(async move {
        while let Some(frame) = rx.recv().await {
            if sink.send(text(frame)).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    while let Some(Ok(msg)) = stream.next().await {
        match msg {
            Message::Text(t) => relay.frame(&room, &peer, t.as_bytes()),
            Message::Binary(b) => relay.frame(&room, &peer, &b),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => {}
        }
    }
    relay.disconnect(&room, &peer);
    tracing::info!(%room, %peer, "left");
    let _ = writer.await;
}

fn text(frame: Vec<u8>) -> Message {
    Message::Text(String::from_utf8(frame).expect("encoder emits UTF-8").into())
}

/// Serves until the listener fails, pruning idle rooms in the background.
pub async fn serve(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    let store = config
        .persist_dir
        .map(|dir| Arc::new(FileStore::new(dir)) as Arc<dyn SnapshotStore>);
    let relay = Relay::new(config.session, store);
    let pruner = relay.clone();
    let interval = config.prune_interval;
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(interval);
        loop {
            tick.tick().await;
            for id in pruner.prune(now_ms()) {
                tracing::info!(room = %id, "pruned empty room");
            }
        }
    });
    axum::serve(
        listener,
        router(relay).into_make_service_with_connect_info::<SocketAddr>(),
    )
    .await
}
