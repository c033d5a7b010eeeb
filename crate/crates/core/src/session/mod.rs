//! Relay session logic, independent of any socket library.
//!
//! A [`Room`] is the sequencer for one session: it stamps every accepted
//! client payload with the next sequence number, applies it to the
//! authoritative [`SharedState`](crate::protocol::SharedState) and fans it
//! out to all members, sender included. Senders never apply their own
//! gestures locally; they wait for the echo. Late joiners get one welcome
//! frame with the current state rather than a replay.

mod lobby;
mod room;
mod wire;

use std::fmt;

use thiserror::Error;

use crate::geometry::ScaleLimits;
use crate::protocol::{Envelope, PeerId, StateSync};

pub use lobby::{JoinError, Lobby, RoomSummary};
pub use room::{Room, RoomFull};
pub use wire::{decode_server_message, encode_server_message};

pub const DEFAULT_ROOM_CAPACITY: usize = 16;
pub const DEFAULT_EMPTY_ROOM_GRACE_MS: u64 = 30_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    pub room_capacity: usize,
    /// How long an empty room keeps its state before it is removed.
    pub empty_room_grace_ms: u64,
    pub scale_limits: ScaleLimits,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            room_capacity: DEFAULT_ROOM_CAPACITY,
            empty_room_grace_ms: DEFAULT_EMPTY_ROOM_GRACE_MS,
            scale_limits: ScaleLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid room id {0:?}: use 1-64 characters from [A-Za-z0-9._-], not starting with '.'")]
pub struct InvalidRoomId(pub String);

/// Room name. Restricted so it is safe to use as a file name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoomId(String);

impl RoomId {
    pub fn new(id: &str) -> Result<Self, InvalidRoomId> {
        let ok = (1..=64).contains(&id.len())
            && !id.starts_with('.')
            && id
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-'));
        if ok {
            Ok(RoomId(id.to_owned()))
        } else {
            Err(InvalidRoomId(id.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RoomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    Malformed,
    NotMember,
    Forbidden,
    SaveFailed,
    RestoreFailed,
    NothingSaved,
    UnknownMesh,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Malformed => "malformed",
            ErrorCode::NotMember => "not-member",
            ErrorCode::Forbidden => "forbidden",
            ErrorCode::SaveFailed => "save-failed",
            ErrorCode::RestoreFailed => "restore-failed",
            ErrorCode::NothingSaved => "nothing-saved",
            ErrorCode::UnknownMesh => "unknown-mesh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ErrorCode::Malformed,
            ErrorCode::NotMember,
            ErrorCode::Forbidden,
            ErrorCode::SaveFailed,
            ErrorCode::RestoreFailed,
            ErrorCode::NothingSaved,
            ErrorCode::UnknownMesh,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
    }
}

/// A frame from the relay to one client.
#[derive(Debug, Clone, PartialEq)]
pub enum ServerMessage {
    /// Sent once to a new member: its id and the full current state.
    Welcome {
        peer_id: PeerId,
        sync: StateSync,
    },
    Envelope(Envelope),
    Refused {
        reason: String,
    },
    /// Sent only to the peer whose message was rejected.
    Error {
        code: ErrorCode,
        message: String,
    },
}

/// A frame addressed to one member.
#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub to: PeerId,
    pub message: ServerMessage,
}

#[cfg(test)]
mod tests;
