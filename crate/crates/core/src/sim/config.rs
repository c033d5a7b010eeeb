use std::fmt;

use serde::{Deserialize, Serialize};

use super::SimError;

/// Per-link delivery model. Uplinks (client→relay) keep FIFO order like a
/// stream socket; `reorder` and `duplicate_prob` apply to relay→client
/// frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    pub min_ms: u64,
    pub max_ms: u64,
    pub reorder: bool,
    /// Chance that a relay→client frame is delivered a second time.
    pub duplicate_prob: f64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            min_ms: 0,
            max_ms: 0,
            reorder: false,
            duplicate_prob: 0.0,
        }
    }
}

/// Relative weights of the generated gesture kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureMix {
    pub rot: f64,
    pub scale: f64,
    pub twist: f64,
    pub plane: f64,
    pub save: f64,
    pub restore: f64,
}

impl Default for GestureMix {
    fn default() -> Self {
        GestureMix {
            rot: 4.0,
            scale: 2.0,
            twist: 2.0,
            plane: 2.0,
            save: 0.5,
            restore: 0.5,
        }
    }
}

impl GestureMix {
    pub(crate) fn weights(&self) -> [f64; 6] {
        [self.rot, self.scale, self.twist, self.plane, self.save, self.restore]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub peer_count: usize,
    /// Total gestures sent, spread over randomly chosen peers.
    pub message_count: usize,
    pub seed: u64,
    pub latency: LatencyModel,
    pub mix: GestureMix,
    /// Virtual time between consecutive gestures.
    pub send_interval_ms: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            peer_count: 2,
            message_count: 100,
            seed: 0,
            latency: LatencyModel::default(),
            mix: GestureMix::default(),
            send_interval_ms: 5,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_owned()));
        if self.peer_count == 0 {
            return bad("peer_count must be at least 1");
        }
        if self.latency.min_ms > self.latency.max_ms {
            return bad("latency min must not exceed max");
        }
        let p = self.latency.duplicate_prob;
        if !(0.0..1.0).contains(&p) {
            return bad("duplicate_prob must be in [0, 1)");
        }
        let w = self.mix.weights();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return bad("gesture weights must be non-negative with a positive sum");
        }
        Ok(())
    }
}

/// Outcome of one simulated session. Every field is a pure function of the
/// config, so two runs with the same seed produce equal reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub peers: usize,
    pub seed: u64,
    /// Largest componentwise |replica − relay| over all peers and model fields.
    pub final_divergence: f64,
    /// Peers whose `last_applied_seq` differs from the relay's at quiescence.
    pub lagging_peers: usize,
    pub server_last_seq: u64,
    pub gestures_sent: u64,
    pub gestures_rejected: u64,
    pub frames_delivered: u64,
    pub duplicate_frames: u64,
    pub uplink_bytes: u64,
    pub downlink_bytes: u64,
    pub transform_gestures: u64,
    /// Encoded bytes of the rotation, scale and twist messages sent.
    pub delta_bytes: u64,
    /// Bytes the same gestures would cost as whole 4×4 transform messages.
    pub full_matrix_bytes: u64,
    pub last_send_ms: u64,
    pub quiescence_ms: u64,
    /// Time from the last send until the last replica change.
    pub convergence_time_ms: u64,
    pub state_hash: String,
}

impl ScenarioReport {
    pub fn converged(&self, tolerance: f64) -> bool {
        self.lagging_peers == 0 && self.final_divergence <= tolerance
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let saving = if self.full_matrix_bytes > 0 {
            100.0 * (1.0 - self.delta_bytes as f64 / self.full_matrix_bytes as f64)
        } else {
            0.0
        };
        writeln!(f, "peers:               {} (seed {})", self.peers, self.seed)?;
        writeln!(
            f,
            "gestures:            {} sent, {} rejected",
            self.gestures_sent, self.gestures_rejected
        )?;
        writeln!(
            f,
            "frames delivered:    {} ({} duplicates)",
            self.frames_delivered, self.duplicate_frames
        )?;
        writeln!(f, "relay last seq:      {}", self.server_last_seq)?;
        writeln!(f, "final divergence:    {:e}", self.final_divergence)?;
        writeln!(f, "lagging peers:       {}", self.lagging_peers)?;
        writeln!(
            f,
            "transform bytes:     {} as deltas vs {} as full matrices ({} gestures, {saving:.1}% smaller)",
            self.delta_bytes, self.full_matrix_bytes, self.transform_gestures
        )?;
        writeln!(
            f,
            "link bytes:          {} up, {} down",
            self.uplink_bytes, self.downlink_bytes
        )?;
        writeln!(
            f,
            "virtual time:        last send {} ms, quiescent {} ms, converged {} ms after last send",
            self.last_send_ms, self.quiescence_ms, self.convergence_time_ms
        )?;
        write!(f, "state hash:          {}", self.state_hash)
    }
}
