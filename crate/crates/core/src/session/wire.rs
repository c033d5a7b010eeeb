use serde_json::json;

use super::{ErrorCode, ServerMessage};
use crate::protocol::{decode, encode, parse_object, write_message, DecodeError, Fields, PeerId, StateSyncWire};

/// Sender name on relay control frames.
const RELAY: &str = "relay";

/// Encodes a relay→client frame. Envelopes use the plain envelope
/// encoding; control frames share its shape with `seq` 0 and the types
/// `welcome`, `refused` and `error`.
pub fn encode_server_message(m: &ServerMessage, now: u64) -> Vec<u8> {
    match m {
        ServerMessage::Envelope(e) => encode(e),
        ServerMessage::Welcome { peer_id, sync } => {
            let mut body = StateSyncWire::to_value(sync);
            body.as_object_mut()
                .expect("sync encodes as an object")
                .insert("peer_id".into(), json!(peer_id.as_str()));
            write_message(0, RELAY, now, "welcome", body)
        }
        ServerMessage::Refused { reason } => write_message(0, RELAY, now, "refused", json!({ "reason": reason })),
        ServerMessage::Error { code, message } => write_message(
            0,
            RELAY,
            now,
            "error",
            json!({ "code": code.as_str(), "message": message }),
        ),
    }
}

pub fn decode_server_message(bytes: &[u8]) -> Result<ServerMessage, DecodeError> {
    let map = parse_object(bytes)?;
    let top = Fields::new(&map, "");
    match top.str("type")? {
        "welcome" => {
            let body = top.object("body")?;
            Ok(ServerMessage::Welcome {
                peer_id: PeerId::new(body.str("peer_id")?),
                sync: StateSyncWire::from_fields(&body)?,
            })
        }
        "refused" => Ok(ServerMessage::Refused {
            reason: top.object("body")?.str("reason")?.to_owned(),
        }),
        "error" => {
            let body = top.object("body")?;
            let code = body.str("code")?;
            Ok(ServerMessage::Error {
                code: ErrorCode::parse(code).ok_or_else(|| body.invalid("code", format!("unknown code `{code}`")))?,
                message: body.str("message")?.to_owned(),
            })
        }
        _ => decode(bytes).map(ServerMessage::Envelope),
    }
}
