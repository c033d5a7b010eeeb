use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::SimError;
use crate::protocol::{decode, ApplyOutcome, SharedState};

/// Result of folding a recorded envelope stream into a fresh replica.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub envelopes: usize,
    pub duplicates: usize,
    pub last_applied_seq: u64,
    /// Envelopes still waiting behind a gap at the end of the transcript.
    pub pending: usize,
    pub state_hash: String,
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "envelopes: {} ({} duplicates, {} pending)",
            self.envelopes, self.duplicates, self.pending
        )?;
        writeln!(f, "last seq:  {}", self.last_applied_seq)?;
        write!(f, "state hash: {}", self.state_hash)
    }
}

/// Replays one encoded envelope per line. Blank lines are skipped.
pub fn replay_transcript_str(text: &str) -> Result<ReplayReport, SimError> {
    let mut state = SharedState::default();
    let mut envelopes = 0;
    let mut duplicates = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| SimError::Transcript { line: i + 1, message };
        let env = decode(line.as_bytes()).map_err(|e| err(e.to_string()))?;
        envelopes += 1;
        if state.apply(env).map_err(|e| err(e.to_string()))? == ApplyOutcome::Duplicate {
            duplicates += 1;
        }
    }
    Ok(ReplayReport {
        envelopes,
        duplicates,
        last_applied_seq: state.last_applied_seq(),
        pending: state.pending_len(),
        state_hash: state.state_hash(),
    })
}

pub fn replay_transcript(path: impl AsRef<Path>) -> Result<ReplayReport, SimError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    replay_transcript_str(&text)
}
