use std::sync::Arc;

use super::*;
use crate::geometry::{primitives, UnitQuaternion, UnitVec3};
use crate::protocol::{encode, ContentHash, MeshContent, Payload, SharedState};
use crate::store::{FileStore, MemoryStore, SnapshotStore};

fn lobby() -> Lobby {
    Lobby::new(SessionConfig::default(), None)
}

fn envelopes_to<'a>(out: &'a [Outbound], peer: &'a PeerId) -> impl Iterator<Item = &'a Envelope> + 'a {
    out.iter()
        .filter(move |o| &o.to == peer)
        .filter_map(|o| match &o.message {
            ServerMessage::Envelope(e) => Some(e),
            _ => None,
        })
}

fn frame(payload: Payload) -> Vec<u8> {
    encode(&Envelope::unsequenced(PeerId::from("ignored"), 5, payload))
}

#[test]
fn first_joiner_gets_welcome_and_no_broadcast() {
    let mut l = lobby();
    let (room, peer, out) = l.handle_join("heart", "Ana", 10).unwrap();
    assert_eq!(out.len(), 1);
    let ServerMessage::Welcome { peer_id, sync } = &out[0].message else {
        panic!("expected welcome, got {out:?}")
    };
    assert_eq!(peer_id, &peer);
    assert_eq!(sync.members, vec![(peer.clone(), "Ana".to_string())]);
    assert_eq!(sync.last_applied_seq, 1);
    assert_eq!(sync.snapshot, Default::default());
    assert_eq!(l.room(&room).unwrap().next_seq(), 2);
}

#[test]
fn late_joiner_gets_one_state_message() {
    let mut l = lobby();
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    let dq = UnitQuaternion::from_axis_angle(UnitVec3::Y, 0.01);
    for i in 0..99 {
        l.handle_client_message(&room, &a, i, Payload::Rotation { dq }, i);
    }
    assert_eq!(l.room(&room).unwrap().state().last_applied_seq(), 100);
    let (_, b, out) = l.handle_join("r", "B", 200).unwrap();
    let to_b: Vec<_> = out.iter().filter(|o| o.to == b).collect();
    assert_eq!(to_b.len(), 1);
    let ServerMessage::Welcome { sync, .. } = &to_b[0].message else {
        panic!("expected welcome")
    };
    // The joiner's own join is seq 101 and is already folded in.
    assert_eq!(sync.last_applied_seq, 101);
    let replica = SharedState::from_sync(sync, l.config().scale_limits);
    let server = l.room(&room).unwrap().state();
    assert_eq!(replica.model(), server.model());
    assert_eq!(envelopes_to(&out, &a).count(), 1);
}

#[test]
fn capacity_is_enforced() {
    let mut l = lobby();
    for i in 0..16 {
        l.handle_join("full", &format!("u{i}"), 0).unwrap();
    }
    assert!(matches!(
        l.handle_join("full", "late", 0),
        Err(JoinError::Full(RoomFull { capacity: 16 }))
    ));
    assert!(matches!(
        l.handle_join("../etc", "x", 0),
        Err(JoinError::InvalidRoom(_))
    ));
}

#[test]
fn malformed_frame_consumes_no_seq() {
    let mut l = lobby();
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    let before = l.room(&room).unwrap().next_seq();
    let out = l.handle_frame(&room, &a, b"{\"type\":\"rot\"}", 1);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].to, a);
    assert!(matches!(
        out[0].message,
        ServerMessage::Error {
            code: ErrorCode::Malformed,
            ..
        }
    ));
    assert_eq!(l.room(&room).unwrap().next_seq(), before);

    let mut stamped = Envelope::unsequenced(a.clone(), 0, Payload::SnapshotSave);
    stamped.seq = 9;
    let out = l.handle_frame(&room, &a, &encode(&stamped), 1);
    assert!(matches!(
        out[0].message,
        ServerMessage::Error {
            code: ErrorCode::Malformed,
            ..
        }
    ));

    let out = l.handle_frame(&room, &a, &frame(Payload::Leave), 1);
    assert!(matches!(
        out[0].message,
        ServerMessage::Error {
            code: ErrorCode::Forbidden,
            ..
        }
    ));
    assert_eq!(l.room(&room).unwrap().next_seq(), before);
}

#[test]
fn broadcast_includes_sender_and_orders_by_arrival() {
    let mut l = lobby();
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    let (_, b, _) = l.handle_join("r", "B", 0).unwrap();
    let first = l.handle_frame(&room, &b, &frame(Payload::scale(2.0).unwrap()), 1);
    let second = l.handle_frame(&room, &a, &frame(Payload::scale(3.0).unwrap()), 1);
    for out in [&first, &second] {
        assert_eq!(out.len(), 2);
        assert!(out.iter().any(|o| o.to == a) && out.iter().any(|o| o.to == b));
    }
    let seqs: Vec<u64> = envelopes_to(&first, &a)
        .chain(envelopes_to(&second, &a))
        .map(|e| e.seq)
        .collect();
    assert_eq!(seqs, vec![3, 4]);
    assert_eq!(envelopes_to(&first, &a).next().unwrap().sender, b);
}

#[test]
fn disconnect_synthesizes_leave_and_room_expires() {
    let mut l = lobby();
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    let (_, b, _) = l.handle_join("r", "B", 0).unwrap();
    assert_eq!(
        l.lobby_list(),
        vec![RoomSummary {
            room_id: room.clone(),
            members: 2
        }]
    );
    let out = l.handle_disconnect(&room, &a, 1_000);
    let leave = envelopes_to(&out, &b).next().unwrap();
    assert_eq!(leave.payload, Payload::Leave);
    assert_eq!(leave.sender, a);
    l.handle_disconnect(&room, &b, 2_000);
    assert_eq!(l.lobby_list()[0].members, 0);
    assert!(l.prune(2_000 + 29_999).is_empty());
    assert_eq!(l.prune(2_000 + 30_000), vec![room]);
    assert!(l.lobby_list().is_empty());
}

#[test]
fn empty_lobby_lists_nothing() {
    assert!(lobby().lobby_list().is_empty());
    assert_eq!(lobby().health_line(), "ok rooms=0 members=0");
}

#[test]
fn restore_without_save_is_refused() {
    let mut l = lobby();
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    let out = l.handle_frame(&room, &a, &frame(Payload::SnapshotRestore { snapshot: None }), 1);
    assert!(matches!(
        out[0].message,
        ServerMessage::Error {
            code: ErrorCode::NothingSaved,
            ..
        }
    ));
}

#[test]
fn restore_fills_in_saved_snapshot() {
    let mut l = lobby();
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    l.handle_frame(&room, &a, &frame(Payload::scale(4.0).unwrap()), 1);
    l.handle_frame(&room, &a, &frame(Payload::SnapshotSave), 2);
    l.handle_frame(&room, &a, &frame(Payload::scale(0.5).unwrap()), 3);
    let out = l.handle_frame(&room, &a, &frame(Payload::SnapshotRestore { snapshot: None }), 4);
    let env = envelopes_to(&out, &a).next().unwrap();
    let Payload::SnapshotRestore { snapshot: Some(s) } = &env.payload else {
        panic!("restore must carry the snapshot")
    };
    assert_eq!(s.scale.get(), 4.0);
    assert_eq!(l.room(&room).unwrap().state().model().scale(), 4.0);
}

#[test]
fn persisted_snapshot_survives_room_teardown() {
    let store: Arc<dyn SnapshotStore> = Arc::new(MemoryStore::default());
    let mut l = Lobby::new(SessionConfig::default(), Some(store.clone()));
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    l.handle_frame(&room, &a, &frame(Payload::scale(3.0).unwrap()), 1);
    l.handle_frame(&room, &a, &frame(Payload::SnapshotSave), 2);
    assert_eq!(store.load(&room).unwrap().unwrap().snapshot.scale.get(), 3.0);
    l.handle_disconnect(&room, &a, 3);
    l.prune(u64::MAX);

    let mut l = Lobby::new(SessionConfig::default(), Some(store));
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    l.handle_frame(&room, &a, &frame(Payload::SnapshotRestore { snapshot: None }), 1);
    assert_eq!(l.room(&room).unwrap().state().model().scale(), 3.0);
}

#[test]
fn failed_persist_reports_save_failed() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let store: Arc<dyn SnapshotStore> = Arc::new(FileStore::new(blocker.join("snapshots")));
    let mut l = Lobby::new(SessionConfig::default(), Some(store));
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    let (_, b, _) = l.handle_join("r", "B", 0).unwrap();
    let before = l.room(&room).unwrap().next_seq();
    let out = l.handle_frame(&room, &a, &frame(Payload::SnapshotSave), 1);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].to, a);
    assert!(matches!(
        out[0].message,
        ServerMessage::Error {
            code: ErrorCode::SaveFailed,
            ..
        }
    ));
    assert!(envelopes_to(&out, &b).next().is_none());
    assert_eq!(l.room(&room).unwrap().next_seq(), before);
}

#[test]
fn inline_import_is_stored_and_broadcast_by_hash() {
    let mut l = lobby();
    let (room, a, _) = l.handle_join("r", "A", 0).unwrap();
    let mesh = primitives::icosphere(40.0, 3);
    let out = l.handle_frame(
        &room,
        &a,
        &frame(Payload::ModelImport {
            mesh_id: "heart".into(),
            content: MeshContent::Inline(mesh.clone()),
        }),
        1,
    );
    let env = envelopes_to(&out, &a).next().unwrap();
    let Payload::ModelImport {
        content: MeshContent::Hash(hash),
        ..
    } = &env.payload
    else {
        panic!("relay must broadcast the hash only")
    };
    assert!(encode(env).len() < 200);
    let blob = l.blob(hash).unwrap();
    assert_eq!(crate::mesh_io::load_mesh(&blob, None).unwrap(), mesh);
    assert_eq!(l.room(&room).unwrap().state().mesh().unwrap().hash, *hash);

    let unknown = ContentHash::of(b"never uploaded");
    let out = l.handle_frame(
        &room,
        &a,
        &frame(Payload::ModelImport {
            mesh_id: "x".into(),
            content: MeshContent::Hash(unknown),
        }),
        2,
    );
    assert!(matches!(
        out[0].message,
        ServerMessage::Error {
            code: ErrorCode::UnknownMesh,
            ..
        }
    ));
}

#[test]
fn server_messages_roundtrip() {
    let mut l = lobby();
    let (_, _, out) = l.handle_join("r", "A", 0).unwrap();
    let msgs = vec![
        out[0].message.clone(),
        ServerMessage::Refused {
            reason: "room is full".into(),
        },
        ServerMessage::Error {
            code: ErrorCode::SaveFailed,
            message: "disk".into(),
        },
        ServerMessage::Envelope(Envelope {
            seq: 3,
            sender: PeerId::from("p1"),
            sent_at: 9,
            payload: Payload::SnapshotSave,
        }),
    ];
    for m in msgs {
        assert_eq!(decode_server_message(&encode_server_message(&m, 77)).unwrap(), m);
    }
}

#[test]
fn non_member_is_rejected() {
    let mut l = lobby();
    let (room, _, _) = l.handle_join("r", "A", 0).unwrap();
    let out = l.handle_frame(&room, &PeerId::from("ghost"), &frame(Payload::SnapshotSave), 1);
    assert!(matches!(
        out[0].message,
        ServerMessage::Error {
            code: ErrorCode::NotMember,
            ..
        }
    ));
}
