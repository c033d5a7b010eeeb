use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ScenarioConfig, ScenarioReport, SimError};
use crate::geometry::{transform_plane, GestureDelta, UnitQuaternion, UnitVec3, Vec3};
use crate::protocol::{encode, encode_matrix_equivalent, Envelope, Payload, PeerId, SharedState};
use crate::session::{
    decode_server_message, encode_server_message, Lobby, RoomId, ServerMessage, SessionConfig, DEFAULT_ROOM_CAPACITY,
};

const ROOM: &str = "sim";

#[derive(Debug)]
enum Event {
    Gesture(usize),
    ToRelay(usize, Vec<u8>),
    ToClient(usize, Vec<u8>, bool),
}

struct Queued {
    at: u64,
    order: u64,
    event: Event,
}

impl PartialEq for Queued {
    fn eq(&self, o: &Self) -> bool {
        (self.at, self.order) == (o.at, o.order)
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Queued {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.at, self.order).cmp(&(o.at, o.order))
    }
}

struct Client {
    id: PeerId,
    replica: Option<SharedState>,
    /// Envelopes that overtook the welcome frame.
    early: Vec<Envelope>,
    /// The peer's fixed view direction, used as the twist axis.
    view_axis: UnitVec3,
    uplink_free_at: u64,
    downlink_free_at: u64,
}

struct Sim {
    cfg: ScenarioConfig,
    rng: ChaCha8Rng,
    queue: BinaryHeap<Reverse<Queued>>,
    order: u64,
    lobby: Lobby,
    room: RoomId,
    clients: Vec<Client>,
    report: ScenarioReport,
    last_change_ms: u64,
    transcript: Option<Vec<String>>,
    recorded_through: u64,
}

/// Runs one scenario against an in-process relay and returns its report.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, SimError> {
    Ok(Sim::new(cfg, false)?.run())
}

/// Like [`run_scenario`], and also returns the relay's sequenced stream as
/// transcript lines (one encoded envelope each).
pub fn run_scenario_with_transcript(cfg: &ScenarioConfig) -> Result<(ScenarioReport, Vec<String>), SimError> {
    let mut sim = Sim::new(cfg, true)?;
    let report = sim.run();
    Ok((report, sim.transcript.take().unwrap_or_default()))
}

impl Sim {
    fn new(cfg: &ScenarioConfig, record: bool) -> Result<Self, SimError> {
        cfg.validate()?;
        let mut sim = Sim {
            cfg: *cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            queue: BinaryHeap::new(),
            order: 0,
            lobby: Lobby::new(
                SessionConfig {
                    room_capacity: cfg.peer_count.max(DEFAULT_ROOM_CAPACITY),
                    ..SessionConfig::default()
                },
                None,
            ),
            room: RoomId::new(ROOM).expect("valid room id"),
            clients: Vec::with_capacity(cfg.peer_count),
            report: ScenarioReport {
                peers: cfg.peer_count,
                seed: cfg.seed,
                final_divergence: 0.0,
                lagging_peers: 0,
                server_last_seq: 0,
                gestures_sent: 0,
                gestures_rejected: 0,
                frames_delivered: 0,
                duplicate_frames: 0,
                uplink_bytes: 0,
                downlink_bytes: 0,
                transform_gestures: 0,
                delta_bytes: 0,
                full_matrix_bytes: 0,
                last_send_ms: 0,
                quiescence_ms: 0,
                convergence_time_ms: 0,
                state_hash: String::new(),
            },
            last_change_ms: 0,
            transcript: record.then(Vec::new),
            recorded_through: 0,
        };
        sim.connect_all();
        let lat = cfg.latency.max_ms;
        let start = 2 * lat + cfg.send_interval_ms.max(1);
        for k in 0..cfg.message_count as u64 {
            let peer = sim.rng.random_range(0..cfg.peer_count);
            sim.push(start + k * cfg.send_interval_ms, Event::Gesture(peer));
        }
        Ok(sim)
    }

    fn connect_all(&mut self) {
        for i in 0..self.cfg.peer_count {
            let view_axis = random_axis(&mut self.rng);
            let name = format!("peer{i}");
            let (_, id, out) = self
                .lobby
                .handle_join(ROOM, &name, 0)
                .expect("capacity is sized to the peer count");
            if i == 0 {
                // The first joiner's join reaches nobody as an envelope.
                self.record(&Envelope {
                    seq: 1,
                    sender: id.clone(),
                    sent_at: 0,
                    payload: Payload::Join { name },
                });
            }
            self.clients.push(Client {
                id,
                replica: None,
                early: Vec::new(),
                view_axis,
                uplink_free_at: 0,
                downlink_free_at: 0,
            });
            self.fan_out(0, out);
        }
    }

    fn push(&mut self, at: u64, event: Event) {
        self.order += 1;
        self.queue.push(Reverse(Queued {
            at,
            order: self.order,
            event,
        }));
    }

    fn latency(&mut self) -> u64 {
        let l = self.cfg.latency;
        self.rng.random_range(l.min_ms..=l.max_ms)
    }

    fn run(&mut self) -> ScenarioReport {
        let mut now = 0;
        while let Some(Reverse(q)) = self.queue.pop() {
            now = q.at;
            match q.event {
                Event::Gesture(peer) => self.gesture(peer, now),
                Event::ToRelay(peer, frame) => {
                    let id = self.clients[peer].id.clone();
                    let out = self.lobby.handle_frame(&self.room, &id, &frame, now);
                    self.fan_out(now, out);
                }
                Event::ToClient(peer, frame, dup) => self.deliver(peer, &frame, dup, now),
            }
        }
        self.finish(now)
    }

    fn fan_out(&mut self, now: u64, out: Vec<crate::session::Outbound>) {
        for o in out {
            if let ServerMessage::Error { .. } = o.message {
                self.report.gestures_rejected += 1;
            }
            if let ServerMessage::Envelope(e) = &o.message {
                self.record(e);
            }
            let Some(peer) = self.clients.iter().position(|c| c.id == o.to) else {
                continue;
            };
            let frame = encode_server_message(&o.message, now);
            let at = self.downlink_time(peer, now);
            self.push(at, Event::ToClient(peer, frame.clone(), false));
            if self.rng.random_bool(self.cfg.latency.duplicate_prob) {
                let at = self.downlink_time(peer, now);
                self.push(at, Event::ToClient(peer, frame, true));
            }
        }
    }

    fn record(&mut self, e: &Envelope) {
        if let Some(t) = self.transcript.as_mut() {
            if e.seq > self.recorded_through {
                self.recorded_through = e.seq;
                t.push(String::from_utf8(encode(e)).expect("encoder emits UTF-8"));
            }
        }
    }

    fn downlink_time(&mut self, peer: usize, now: u64) -> u64 {
        let at = now + self.latency();
        if self.cfg.latency.reorder {
            return at;
        }
        let c = &mut self.clients[peer];
        c.downlink_free_at = c.downlink_free_at.max(at);
        c.downlink_free_at
    }

    fn deliver(&mut self, peer: usize, frame: &[u8], dup: bool, now: u64) {
        self.report.frames_delivered += 1;
        self.report.downlink_bytes += frame.len() as u64;
        if dup {
            self.report.duplicate_frames += 1;
        }
        let msg = decode_server_message(frame).expect("relay frames decode");
        let limits = self.lobby.config().scale_limits;
        let c = &mut self.clients[peer];
        let before = c.replica.as_ref().map(SharedState::last_applied_seq);
        match msg {
            ServerMessage::Welcome { sync, .. } if c.replica.is_none() => {
                let mut r = SharedState::from_sync(&sync, limits);
                for e in c.early.drain(..) {
                    r.apply(e).expect("relay envelopes are sequenced");
                }
                c.replica = Some(r);
            }
            ServerMessage::Envelope(e) => match c.replica.as_mut() {
                Some(r) => {
                    r.apply(e).expect("relay envelopes are sequenced");
                }
                None => c.early.push(e),
            },
            _ => {}
        }
        let after = c.replica.as_ref().map(SharedState::last_applied_seq);
        if after != before {
            self.last_change_ms = now;
        }
    }

    fn gesture(&mut self, peer: usize, now: u64) {
        let Some(replica) = self.clients[peer].replica.as_ref() else {
            // Not welcomed yet; a real client would not offer controls.
            return;
        };
        let model = *replica.model();
        let limits = *replica.limits();
        let axis = self.clients[peer].view_axis;
        let weights = self.cfg.mix.weights();
        let total: f64 = weights.iter().sum();
        let mut pick = self.rng.random_range(0.0..total);
        let mut kind = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                kind = i;
                break;
            }
            pick -= w;
        }
        let payload = match kind {
            0 => {
                let a = random_axis(&mut self.rng);
                let angle = self.rng.random_range(-0.2..0.2);
                Payload::Rotation {
                    dq: UnitQuaternion::from_axis_angle(a, angle),
                }
            }
            1 => Payload::scale(self.rng.random_range(-0.3f64..0.3).exp()).expect("positive factor"),
            2 => Payload::Twist {
                angle: self.rng.random_range(-0.5..0.5),
                axis,
            },
            3 => {
                let plane = if self.rng.random_bool(0.5) {
                    let a = random_axis(&mut self.rng);
                    let dq = UnitQuaternion::from_axis_angle(a, self.rng.random_range(-0.3..0.3));
                    transform_plane(model.plane, dq)
                } else {
                    let dd = self.rng.random_range(-5.0..5.0);
                    model.plane.offset(dd).expect("finite offset")
                };
                Payload::PlaneUpdate { plane }
            }
            4 => Payload::SnapshotSave,
            _ => Payload::SnapshotRestore { snapshot: None },
        };
        let c = &self.clients[peer];
        let env = Envelope::unsequenced(c.id.clone(), now, payload);
        let frame = encode(&env);
        if env.payload.is_transform() {
            let delta = match env.payload {
                Payload::Rotation { dq } => GestureDelta::Rotation { dq },
                Payload::Scale { factor } => GestureDelta::Scale { factor },
                Payload::Twist { angle, axis } => GestureDelta::Twist { angle, axis },
                _ => unreachable!(),
            };
            let m = model.apply(&delta, &limits).transform_matrix();
            self.report.transform_gestures += 1;
            self.report.delta_bytes += frame.len() as u64;
            self.report.full_matrix_bytes += encode_matrix_equivalent(0, &c.id, now, &m).len() as u64;
        }
        self.report.gestures_sent += 1;
        self.report.uplink_bytes += frame.len() as u64;
        self.report.last_send_ms = now;
        let at = now + self.latency();
        let c = &mut self.clients[peer];
        c.uplink_free_at = c.uplink_free_at.max(at);
        let at = c.uplink_free_at;
        self.push(at, Event::ToRelay(peer, frame));
    }

    fn finish(&mut self, now: u64) -> ScenarioReport {
        let server = self.lobby.room(&self.room).expect("room outlives the run").state();
        let mut r = self.report.clone();
        r.server_last_seq = server.last_applied_seq();
        r.state_hash = server.state_hash();
        r.quiescence_ms = now;
        r.convergence_time_ms = self.last_change_ms.saturating_sub(r.last_send_ms);
        for c in &self.clients {
            match &c.replica {
                Some(rep) if rep.last_applied_seq() == server.last_applied_seq() => {
                    r.final_divergence = r.final_divergence.max(rep.model().max_abs_diff(server.model()));
                }
                _ => r.lagging_peers += 1,
            }
        }
        r
    }
}

/// Uniform direction by rejection sampling in the unit ball.
fn random_axis(rng: &mut ChaCha8Rng) -> UnitVec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n2 = v.dot(v);
        if n2 > 1e-6 && n2 <= 1.0 {
            return UnitVec3::new(v).expect("nonzero vector");
        }
    }
}
