//! Deterministic multi-peer simulation.
//!
//! A virtual clock drives N client replicas and one in-process relay
//! ([`Lobby`](crate::session::Lobby)) through encoded frames, with seeded
//! link latency, reordering and duplication. No wall-clock time or threads
//! are involved, so a seed fully determines the [`ScenarioReport`].

mod config;
mod engine;
mod transcript;

use thiserror::Error;

pub use config::{GestureMix, LatencyModel, ScenarioConfig, ScenarioReport};
pub use engine::{run_scenario, run_scenario_with_transcript};
pub use transcript::{replay_transcript, replay_transcript_str, ReplayReport};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("cannot read transcript {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("transcript line {line}: {message}")]
    Transcript { line: usize, message: String },
}
