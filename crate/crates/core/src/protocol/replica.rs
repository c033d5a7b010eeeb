use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use super::{mesh_blob, Envelope, MeshContent, MeshRef, Payload, PeerId, ProtocolError, Snapshot};
use crate::geometry::{GestureDelta, ModelState, ScaleLimits, Vec3};

/// What [`SharedState::apply`] did with an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyOutcome {
    /// Applied, together with any buffered successors; `through` is the new
    /// `last_applied_seq`.
    Applied { through: u64 },
    /// Arrived ahead of a gap and is waiting in the pending buffer.
    Buffered,
    /// Already applied or already buffered; ignored.
    Duplicate,
}

/// State handed to a late joiner instead of a full replay.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSync {
    pub last_applied_seq: u64,
    pub snapshot: Snapshot,
    pub anchor: Vec3,
    pub saved: Option<Snapshot>,
    pub members: Vec<(PeerId, String)>,
    pub mesh: Option<MeshRef>,
}

/// One replica of a session: the model plus everything needed to apply the
/// sequenced envelope stream in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedState {
    model: ModelState,
    last_applied_seq: u64,
    saved: Option<Snapshot>,
    members: BTreeMap<PeerId, String>,
    pending: BTreeMap<u64, Envelope>,
    mesh: Option<MeshRef>,
    limits: ScaleLimits,
}

impl Default for SharedState {
    fn default() -> Self {
        SharedState::new(ScaleLimits::default())
    }
}

impl SharedState {
    pub fn new(limits: ScaleLimits) -> Self {
        SharedState {
            model: ModelState::default(),
            last_applied_seq: 0,
            saved: None,
            members: BTreeMap::new(),
            pending: BTreeMap::new(),
            mesh: None,
            limits,
        }
    }

    /// Starts a replica from a late-join state transfer.
    pub fn from_sync(sync: &StateSync, limits: ScaleLimits) -> Self {
        let mut s = SharedState::new(limits);
        s.restore(&sync.snapshot);
        s.model.anchor = sync.anchor;
        s.last_applied_seq = sync.last_applied_seq;
        s.saved = sync.saved;
        s.members = sync.members.iter().cloned().collect();
        s.mesh = sync.mesh.clone();
        s
    }

    pub fn to_sync(&self) -> StateSync {
        StateSync {
            last_applied_seq: self.last_applied_seq,
            snapshot: snapshot_of(self),
            anchor: self.model.anchor,
            saved: self.saved,
            members: self.members.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            mesh: self.mesh.clone(),
        }
    }

    pub fn model(&self) -> &ModelState {
        &self.model
    }

    pub fn last_applied_seq(&self) -> u64 {
        self.last_applied_seq
    }

    pub fn saved(&self) -> Option<&Snapshot> {
        self.saved.as_ref()
    }

    pub fn members(&self) -> &BTreeMap<PeerId, String> {
        &self.members
    }

    pub fn mesh(&self) -> Option<&MeshRef> {
        self.mesh.as_ref()
    }

    pub fn limits(&self) -> &ScaleLimits {
        &self.limits
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Sequence numbers currently held back waiting for a gap to fill.
    pub fn pending_seqs(&self) -> impl Iterator<Item = u64> + '_ {
        self.pending.keys().copied()
    }

    /// Applies `env` if it is next in sequence, buffers it if it is early,
    /// and drops it if it was seen before.
    pub fn apply(&mut self, env: Envelope) -> Result<ApplyOutcome, ProtocolError> {
        if env.seq == 0 {
            return Err(ProtocolError::UnsequencedEnvelope);
        }
        if matches!(env.payload, Payload::SnapshotRestore { snapshot: None }) {
            return Err(ProtocolError::RestoreWithoutSnapshot);
        }
        if env.seq <= self.last_applied_seq || self.pending.contains_key(&env.seq) {
            return Ok(ApplyOutcome::Duplicate);
        }
        if env.seq > self.last_applied_seq + 1 {
            self.pending.insert(env.seq, env);
            return Ok(ApplyOutcome::Buffered);
        }
        self.apply_in_order(&env);
        while let Some(next) = self.pending.remove(&(self.last_applied_seq + 1)) {
            self.apply_in_order(&next);
        }
        Ok(ApplyOutcome::Applied {
            through: self.last_applied_seq,
        })
    }

    fn apply_in_order(&mut self, env: &Envelope) {
        debug_assert_eq!(env.seq, self.last_applied_seq + 1);
        let delta = match &env.payload {
            Payload::Rotation { dq } => Some(GestureDelta::Rotation { dq: *dq }),
            Payload::Scale { factor } => Some(GestureDelta::Scale { factor: *factor }),
            Payload::Twist { angle, axis } => Some(GestureDelta::Twist {
                angle: *angle,
                axis: *axis,
            }),
            _ => None,
        };
        if let Some(d) = delta {
            self.model = self.model.apply(&d, &self.limits);
        }
        match &env.payload {
            Payload::PlaneUpdate { plane } => self.model.plane = *plane,
            Payload::AnchorSet { translation } => self.model.anchor = *translation,
            Payload::SnapshotSave => self.saved = Some(snapshot_of(self)),
            Payload::SnapshotRestore { snapshot: Some(s) } => self.restore(s),
            Payload::ModelImport { mesh_id, content } => {
                let hash = match content {
                    MeshContent::Hash(h) => Some(h.clone()),
                    MeshContent::Inline(m) => mesh_blob(m).map(|(_, h)| h),
                };
                if let Some(hash) = hash {
                    self.mesh = Some(MeshRef {
                        mesh_id: mesh_id.clone(),
                        hash,
                    });
                }
            }
            Payload::Join { name } => {
                self.members.insert(env.sender.clone(), name.clone());
            }
            Payload::Leave => {
                self.members.remove(&env.sender);
            }
            _ => {}
        }
        self.last_applied_seq = env.seq;
    }

    fn restore(&mut self, s: &Snapshot) {
        self.model.orientation = s.orientation;
        self.model.set_scale(s.scale, &self.limits);
        self.model.plane = s.plane;
    }

    /// Hex SHA-256 over `last_applied_seq` and the exact bit patterns of
    /// every model field.
    pub fn state_hash(&self) -> String {
        let m = &self.model;
        let mut h = Sha256::new();
        h.update(self.last_applied_seq.to_le_bytes());
        let reals = m
            .orientation
            .to_array()
            .into_iter()
            .chain([m.scale()])
            .chain(m.anchor.to_array())
            .chain(m.plane.to_array());
        for r in reals {
            h.update(r.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Value-returning form of [`SharedState::apply`].
pub fn apply_envelope(s: &SharedState, e: Envelope) -> Result<SharedState, ProtocolError> {
    let mut next = s.clone();
    next.apply(e)?;
    Ok(next)
}

/// The current orientation, scale and plane.
pub fn snapshot_of(s: &SharedState) -> Snapshot {
    Snapshot {
        orientation: s.model.orientation,
        scale: crate::geometry::ScaleFactor::new(s.model.scale()).expect("model scale is positive"),
        plane: s.model.plane,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PlaneEquation, UnitQuaternion};

    fn env(seq: u64, payload: Payload) -> Envelope {
        Envelope {
            seq,
            sender: PeerId::from("p1"),
            sent_at: 0,
            payload,
        }
    }

    fn scale(seq: u64, f: f64) -> Envelope {
        env(seq, Payload::scale(f).unwrap())
    }

    fn at_seq(n: u64) -> SharedState {
        let mut s = SharedState::default();
        for seq in 1..=n {
            s.apply(env(
                seq,
                Payload::AnchorSet {
                    translation: Vec3::ZERO,
                },
            ))
            .unwrap();
        }
        s
    }

    #[test]
    fn in_order_apply() {
        let s = at_seq(5);
        let next = apply_envelope(&s, scale(6, 2.0)).unwrap();
        assert_eq!(next.model().scale(), 2.0);
        assert_eq!(next.last_applied_seq(), 6);
        assert_eq!(s.model().scale(), 1.0);
    }

    #[test]
    fn early_envelopes_wait_for_the_gap() {
        let mut s = at_seq(5);
        assert_eq!(s.apply(scale(8, 2.0)), Ok(ApplyOutcome::Buffered));
        assert_eq!(s.last_applied_seq(), 5);
        assert_eq!(s.apply(scale(6, 2.0)), Ok(ApplyOutcome::Applied { through: 6 }));
        assert_eq!(s.apply(scale(7, 2.0)), Ok(ApplyOutcome::Applied { through: 8 }));
        assert_eq!(s.model().scale(), 8.0);
        assert_eq!(s.pending_len(), 0);
    }

    #[test]
    fn stale_envelope_is_dropped() {
        let s = at_seq(5);
        let mut t = s.clone();
        assert_eq!(t.apply(scale(4, 3.0)), Ok(ApplyOutcome::Duplicate));
        assert_eq!(t, s);
    }

    #[test]
    fn duplicate_of_buffered_is_dropped() {
        let mut s = at_seq(1);
        s.apply(scale(3, 2.0)).unwrap();
        assert_eq!(s.apply(scale(3, 5.0)), Ok(ApplyOutcome::Duplicate));
        s.apply(scale(2, 1.0)).unwrap();
        assert_eq!(s.model().scale(), 2.0);
    }

    #[test]
    fn zero_seq_and_empty_restore_are_errors() {
        let mut s = SharedState::default();
        assert_eq!(s.apply(scale(0, 2.0)), Err(ProtocolError::UnsequencedEnvelope));
        assert_eq!(
            s.apply(env(1, Payload::SnapshotRestore { snapshot: None })),
            Err(ProtocolError::RestoreWithoutSnapshot)
        );
        assert_eq!(s.last_applied_seq(), 0);
    }

    #[test]
    fn plane_update_is_taken_verbatim() {
        let plane = PlaneEquation::new(0.6, 0.0, 0.8, 12.0).unwrap();
        let s = apply_envelope(&SharedState::default(), env(1, Payload::PlaneUpdate { plane })).unwrap();
        assert_eq!(s.model().plane, plane);
    }

    #[test]
    fn snapshot_defaults_and_value_semantics() {
        let mut s = SharedState::default();
        let fresh = snapshot_of(&s);
        assert_eq!(fresh.orientation, UnitQuaternion::IDENTITY);
        assert_eq!(fresh.scale.get(), 1.0);
        assert_eq!(fresh.plane, PlaneEquation::default());
        s.apply(scale(1, 3.0)).unwrap();
        let snap = snapshot_of(&s);
        assert_eq!(snap.scale.get(), 3.0);
        s.apply(scale(2, 2.0)).unwrap();
        assert_eq!(snap.scale.get(), 3.0);
    }

    #[test]
    fn membership_tracks_join_and_leave() {
        let mut s = SharedState::default();
        s.apply(env(1, Payload::Join { name: "Ana".into() })).unwrap();
        assert_eq!(s.members().get(&PeerId::from("p1")).map(String::as_str), Some("Ana"));
        s.apply(env(2, Payload::Leave)).unwrap();
        assert!(s.members().is_empty());
    }

    #[test]
    fn sync_roundtrip_reproduces_state() {
        let mut s = at_seq(3);
        s.apply(scale(4, 2.0)).unwrap();
        s.apply(env(5, Payload::SnapshotSave)).unwrap();
        s.apply(env(6, Payload::Join { name: "Bo".into() })).unwrap();
        let joined = SharedState::from_sync(&s.to_sync(), *s.limits());
        assert_eq!(joined, s);
        assert_eq!(joined.state_hash(), s.state_hash());
    }
}
