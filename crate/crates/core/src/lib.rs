//! Core of a collaborative mesh co-viewing session.
//!
//! Peers inspect one shared triangle mesh, rotate, scale and twist it, and
//! move a slicing plane through it. Every change travels as a small
//! per-gesture message through a relay that stamps a sequence number, and
//! every replica applies the stamped stream in order.
//!
//! - [`geometry`]: quaternions, planes, slicing masks, double-sided meshes.
//! - [`mesh_io`]: STL and OBJ loading and saving.
//! - [`protocol`]: wire envelopes and the replicated [`protocol::SharedState`].
//! - [`session`]: transport-independent room and lobby logic for the relay.
//! - [`store`]: snapshot persistence.
//! - [`sim`]: deterministic multi-peer simulator.

pub mod geometry;
pub mod mesh_io;
pub mod protocol;
pub mod session;
pub mod sim;
pub mod store;
