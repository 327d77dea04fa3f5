use std::collections::BTreeSet;

use thiserror::Error;

use crate::author::Author;
use crate::op::Op;
use crate::timestamp::{LogIndex, Timestamp};

/// One replica's subjective op log: every op it authored or received, in
/// reception order. Ids are pairwise distinct, the first entry is the Root,
/// and an own-authored entry always sits at the position its `andx` names.
///
/// A freshly joined replica starts with an empty log and receives the
/// document's root as its first merged op.
#[derive(Clone, Debug)]
pub struct ReplicaLog {
    author: Author,
    entries: Vec<Op>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AppendError {
    #[error("op {0} is already in the log")]
    DuplicateId(Timestamp),
    #[error("op {id} references {parent}, which is not in the log")]
    RefNotInLog { id: Timestamp, parent: Timestamp },
    #[error("own-authored op {id} must use author index {expected}")]
    BadSelfIndex { id: Timestamp, expected: u32 },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("prefix length {k} exceeds log length {len}")]
pub struct PrefixOutOfRange {
    pub k: u32,
    pub len: u32,
}

impl ReplicaLog {
    pub fn new(author: Author) -> Self {
        ReplicaLog { author, entries: Vec::new() }
    }

    pub fn author(&self) -> Author {
        self.author
    }

    pub fn len(&self) -> u32 {
        self.entries.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: LogIndex) -> Option<&Op> {
        self.entries.get(j.slot())
    }

    pub fn entries(&self) -> &[Op] {
        &self.entries
    }

    /// Reference lookup: linear scan, `None` when the op was never received.
    /// The amortized fast path lives in the co-structures; this stays the
    /// simple ground truth the fast path is checked against.
    pub fn ndx(&self, t: Timestamp) -> Option<LogIndex> {
        self.entries
            .iter()
            .position(|op| op.id == t)
            .map(|slot| LogIndex::new(slot as u32 + 1).unwrap())
    }

    /// Validating append. The root goes only into an empty log; any other op
    /// needs its parent already present; own-authored ops must claim the next
    /// log position as their author index.
    pub fn append(&mut self, op: Op) -> Result<LogIndex, AppendError> {
        if self.ndx(op.id).is_some() {
            return Err(AppendError::DuplicateId(op.id));
        }
        if op.id.author == self.author && op.id.andx != self.len() + 1 {
            return Err(AppendError::BadSelfIndex { id: op.id, expected: self.len() + 1 });
        }
        if op.is_root() {
            // A root's reference is itself, satisfiable only as entry 1.
            if !self.entries.is_empty() {
                return Err(AppendError::RefNotInLog { id: op.id, parent: op.parent });
            }
        } else if self.ndx(op.parent).is_none() {
            return Err(AppendError::RefNotInLog { id: op.id, parent: op.parent });
        }
        self.push_unchecked(op);
        Ok(LogIndex::new(self.len()).unwrap())
    }

    /// Append for callers that already guarantee the `append` checks, e.g.
    /// the document merge path after its own admission checks.
    pub(crate) fn push_unchecked(&mut self, op: Op) {
        self.entries.push(op);
    }

    /// Raw append for tests that construct deliberately inconsistent logs.
    #[cfg(test)]
    pub(crate) fn push_for_test(&mut self, op: Op) {
        self.entries.push(op);
    }

    /// Ids of the first `k` entries. `k = 0` is the empty set.
    pub fn prefix_set(&self, k: u32) -> Result<BTreeSet<Timestamp>, PrefixOutOfRange> {
        if k > self.len() {
            return Err(PrefixOutOfRange { k, len: self.len() });
        }
        Ok(self.entries[..k as usize].iter().map(|op| op.id).collect())
    }
}
