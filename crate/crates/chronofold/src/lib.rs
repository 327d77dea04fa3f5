//! A replicated text type built on a subjective operation log.
//!
//! Each replica appends every operation it authors or receives to a local
//! append-only log, in its own reception order. Alongside the log it keeps
//! the *chronofold*: one ⟨value, weave successor⟩ pair per log entry, whose
//! successor links thread the entries into the document order. Merging a
//! remote op appends one pair and rewrites exactly one existing link, so
//! integration is O(1) amortized and nothing already written ever moves.
//!
//! Identity lives outside the hot path. An op is named by ⟨author index,
//! author⟩, and the mapping between names and local log positions is kept
//! in compressed range maps that are consulted only when talking to other
//! replicas. Concurrent edits at the same spot are ordered by comparing
//! names, highest first, which keeps every replica's weave identical once
//! the same ops have arrived.
//!
//! The `doc` module is the front door: [`Doc`] owns a log, its chronofold,
//! and the co-structures, and exposes editing, merging, rendering, version
//! diffs, and replication plumbing. `examples/` walks each capability.

pub mod author;
pub mod axioms;
pub mod bench;
pub mod chronofold;
pub mod costructs;
pub mod diff;
pub mod doc;
pub mod dump;
pub mod fuzz;
pub mod log;
pub mod op;
pub mod oracle;
pub mod replication;
pub mod script;
pub mod timestamp;

#[cfg(test)]
pub(crate) mod testutil;

pub use author::{Author, AuthorError};
pub use chronofold::{Chronofold, Entry, Weave};
pub use costructs::{Attribute, CoStructures, IndexOutOfRange, SHIFT_SCAN_THRESHOLD};
pub use diff::Splice;
pub use doc::{Doc, EditError, LineOutOfRange, MergeError, Version, VersionError};
pub use log::{AppendError, ReplicaLog};
pub use op::{Op, OpError, OpValue};
pub use replication::{
    decode_batch, decode_op, encode_batch, encode_op, sync, BatchError, BatchErrorKind, OpBatch,
    OpsSinceError, PeerState, SyncError, WireError,
};
pub use timestamp::{LogIndex, Timestamp};
