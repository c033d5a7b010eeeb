mod common;

use common::{fixture, fixture_path};
use coview_core::protocol::SharedState;
use coview_core::sim::{replay_transcript, SimError};

#[test]
fn three_envelope_transcript_matches_golden_hash() {
    let golden = String::from_utf8(fixture("golden_3.sha256")).unwrap();
    let r = replay_transcript(fixture_path("transcript_3.txt")).unwrap();
    assert_eq!(r.envelopes, 3);
    assert_eq!(r.last_applied_seq, 3);
    assert_eq!(r.state_hash, golden.trim());
}

#[test]
fn empty_transcript_gives_default_hash() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.txt");
    std::fs::write(&path, "").unwrap();
    let r = replay_transcript(&path).unwrap();
    assert_eq!(r.envelopes, 0);
    assert_eq!(r.state_hash, SharedState::default().state_hash());
}

#[test]
fn corrupted_line_is_named() {
    let err = replay_transcript(fixture_path("transcript_bad_line2.txt")).unwrap_err();
    assert!(matches!(err, SimError::Transcript { line: 2, .. }), "{err}");
    assert!(err.to_string().contains("line 2"));
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        replay_transcript(fixture_path("no-such-transcript.txt")),
        Err(SimError::Io { .. })
    ));
}
