//! Canonical world snapshots: UTF-8 JSON with lexicographically sorted keys
//! and every amount rendered as an exact decimal string (or `p/q` when the
//! expansion does not terminate). Loading a snapshot and snapshotting again
//! reproduces the document byte for byte.

use serde_json::Value;
use thiserror::Error;

use crate::state::World;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot: {0}")]
    Malformed(#[from] serde_json::Error),
}

/// Canonical single-line document.
pub fn snapshot(world: &World) -> String {
    serde_json::to_string(&to_sorted_value(world)).expect("world serializes")
}

/// Canonical indented document; same key order, friendlier diffs.
pub fn snapshot_pretty(world: &World) -> String {
    let mut doc = serde_json::to_string_pretty(&to_sorted_value(world)).expect("world serializes");
    doc.push('\n');
    doc
}

/// Sorted-key JSON value of the world; the delta tracker diffs these.
pub fn to_sorted_value(world: &World) -> Value {
    // serde_json maps are BTree-backed, so object keys come out sorted.
    serde_json::to_value(world).expect("world serializes")
}

pub fn load(document: &str) -> Result<World, SnapshotError> {
    Ok(serde_json::from_str(document)?)
}
