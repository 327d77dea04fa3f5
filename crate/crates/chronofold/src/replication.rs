//! Moving ops between replicas: a line-oriented wire encoding, postfix
//! export, and the admission checks a receiver runs before merging.
//!
//! A replica ships edits by sending a contiguous postfix of its own log;
//! the receiver remembers how much of each peer's log it has consumed and
//! asks for the rest. Ops relayed in the sender's subjective order keep the
//! receiver's log causally closed without any extra metadata, so admission
//! only has to catch senders that break that order.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::author::Author;
use crate::doc::{Doc, MergeError};
use crate::op::{Op, OpValue};
use crate::timestamp::{LogIndex, Timestamp};

/// A contiguous run of one sender's log, starting at `start_index` in the
/// sender's own numbering.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OpBatch {
    pub sender: Author,
    pub start_index: u32,
    pub ops: Vec<Op>,
}

/// What a replica remembers about one peer: how much of the peer's log it
/// has consumed, and the highest author index the peer has relayed for each
/// author (an honest log relays every author's ops in ascending index order,
/// so a regression proves the peer reordered or rewrote history).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PeerState {
    pub peer: Author,
    pub known_length: u32,
    pub high_water: BTreeMap<Author, u32>,
}

impl PeerState {
    pub fn new(peer: Author) -> Self {
        PeerState { peer, known_length: 0, high_water: BTreeMap::new() }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("line {line}: malformed: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: bad value token {token:?}")]
    BadValue { line: usize, token: String },
    #[error("line {line}: bad author {token:?}: {reason}")]
    BadAuthor { line: usize, token: String, reason: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("postfix start {n} exceeds log length {len}")]
pub struct OpsSinceError {
    pub n: u32,
    pub len: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BatchErrorKind {
    /// An author index regressed, or the batch skips part of the sender's log.
    OutOfOrderIndex,
    /// An op claims an index inconsistent with the log position carrying it.
    BadAuthorIndex,
    /// The op's reference is not merged here (or not usable as a parent).
    UnknownRef,
}

/// Batch rejection. Everything before the offending op stays applied;
/// `applied` counts the ops merged before the abort.
#[derive(Debug, PartialEq, Eq)]
pub struct BatchError {
    pub kind: BatchErrorKind,
    pub position: u32,
    pub op: Option<Op>,
    pub applied: usize,
}

impl fmt::Display for BatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at sender position {}", self.kind, self.position)?;
        if let Some(op) = &self.op {
            write!(f, " (op {op})")?;
        }
        write!(f, "; {} ops applied before abort", self.applied)
    }
}

impl std::error::Error for BatchError {}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyncError {
    #[error("requesting postfix: {0}")]
    Postfix(#[from] OpsSinceError),
    #[error("wire: {0}")]
    Wire(#[from] WireError),
    #[error("admission: {0}")]
    Admission(#[from] BatchError),
}

// ── wire format ─────────────────────────────────────────────────────────
//
// One op per line: `<andx> <author> <ref_andx> <ref_author> <val>` with
// val one of `R` (root), `T` (tombstone), or `C` + 4-6 uppercase hex digits
// of the codepoint. A batch is a `CFOP1 <sender> <start_index> <count>`
// header followed by exactly `count` op lines. UTF-8 throughout.

pub(crate) fn encode_val(val: OpValue) -> String {
    match val {
        OpValue::Root => "R".to_string(),
        OpValue::Tombstone => "T".to_string(),
        OpValue::Char(c) => format!("C{:04X}", c as u32),
    }
}

pub fn encode_op(op: &Op) -> String {
    let val = encode_val(op.val);
    format!("{} {} {} {} {}", op.id.andx, op.id.author, op.parent.andx, op.parent.author, val)
}

pub fn decode_op(line: &str) -> Result<Op, WireError> {
    decode_op_at(1, line)
}

fn decode_op_at(line_no: usize, line: &str) -> Result<Op, WireError> {
    let malformed = |reason: &str| WireError::MalformedLine { line: line_no, reason: reason.into() };
    let fields: Vec<&str> = line.split_whitespace().collect();
    let [andx, author, ref_andx, ref_author, val] = fields[..] else {
        return Err(malformed("expected 5 fields"));
    };
    let id = Timestamp::new(parse_index(line_no, andx)?, parse_author(line_no, author)?);
    let parent =
        Timestamp::new(parse_index(line_no, ref_andx)?, parse_author(line_no, ref_author)?);
    let val = parse_value(line_no, val)?;
    Op::new(id, parent, val).map_err(|e| malformed(&e.to_string()))
}

fn parse_index(line: usize, token: &str) -> Result<u32, WireError> {
    let ok = !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit());
    let value = if ok { token.parse::<u32>().ok() } else { None };
    match value {
        Some(v) if v >= 1 => Ok(v),
        _ => Err(WireError::MalformedLine {
            line,
            reason: format!("bad index {token:?} (want a decimal >= 1)"),
        }),
    }
}

fn parse_author(line: usize, token: &str) -> Result<Author, WireError> {
    Author::new(token).map_err(|e| WireError::BadAuthor {
        line,
        token: token.into(),
        reason: e.to_string(),
    })
}

pub(crate) fn parse_value(line: usize, token: &str) -> Result<OpValue, WireError> {
    let bad = || WireError::BadValue { line, token: token.into() };
    match token.as_bytes() {
        b"R" => Ok(OpValue::Root),
        b"T" => Ok(OpValue::Tombstone),
        [b'C', hex @ ..] if (4..=6).contains(&hex.len()) => {
            if !hex.iter().all(|b| b.is_ascii_digit() || (b'A'..=b'F').contains(b)) {
                return Err(bad());
            }
            let code = u32::from_str_radix(&token[1..], 16).map_err(|_| bad())?;
            char::from_u32(code).map(OpValue::Char).ok_or_else(bad)
        }
        _ => Err(bad()),
    }
}

pub fn encode_batch(batch: &OpBatch) -> String {
    let mut out =
        format!("CFOP1 {} {} {}\n", batch.sender, batch.start_index, batch.ops.len());
    for op in &batch.ops {
        out.push_str(&encode_op(op));
        out.push('\n');
    }
    out
}

pub fn decode_batch(text: &str) -> Result<OpBatch, WireError> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(WireError::MalformedLine { line: 1, reason: "empty input".into() });
    };
    let malformed = |reason: &str| WireError::MalformedLine { line: 1, reason: reason.into() };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [magic, sender, start, count] = fields[..] else {
        return Err(malformed("expected `CFOP1 <sender> <start_index> <count>`"));
    };
    if magic != "CFOP1" {
        return Err(malformed("missing CFOP1 magic"));
    }
    let sender = parse_author(1, sender)?;
    let start_index = parse_index(1, start)?;
    let count = if count.bytes().all(|b| b.is_ascii_digit()) && !count.is_empty() {
        count.parse::<usize>().map_err(|_| malformed("bad op count"))?
    } else {
        return Err(malformed("bad op count"));
    };
    let mut ops = Vec::with_capacity(count);
    for _ in 0..count {
        let Some((i, line)) = lines.next() else {
            return Err(WireError::MalformedLine {
                line: count + 1,
                reason: format!("batch promises {count} ops, input ended early"),
            });
        };
        ops.push(decode_op_at(i + 1, line)?);
    }
    if let Some((i, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(WireError::MalformedLine {
            line: i + 1,
            reason: format!("trailing content {extra:?}"),
        });
    }
    Ok(OpBatch { sender, start_index, ops })
}

// ── replica-side operations ─────────────────────────────────────────────

impl Doc {
    /// The postfix of this log after index `n`, rebuilt from the
    /// co-structures (timestamps via the range maps, references via the
    /// parent map) rather than read out of the stored log.
    pub fn ops_since(&self, n: u32) -> Result<OpBatch, OpsSinceError> {
        if n > self.len() {
            return Err(OpsSinceError { n, len: self.len() });
        }
        let mut ops = Vec::with_capacity((self.len() - n) as usize);
        for raw in n + 1..=self.len() {
            let j = LogIndex::new(raw).unwrap();
            let id = self.inverse_ndx(j).expect("index in range");
            let parent_idx = self.costructures().parent_ndx(j).expect("index in range");
            let parent = self.inverse_ndx(parent_idx).expect("index in range");
            let val = self.fold().get(j).expect("index in range").val;
            ops.push(Op::new(id, parent, val).expect("merged entries are well formed"));
        }
        Ok(OpBatch { sender: self.author(), start_index: n + 1, ops })
    }

    /// What we have consumed of `peer`'s log so far.
    pub fn peer_known_length(&self, peer: Author) -> u32 {
        self.peers.get(&peer).map_or(0, |p| p.known_length)
    }

    pub fn peer_state(&self, peer: Author) -> Option<&PeerState> {
        self.peers.get(&peer)
    }

    /// Validate and merge a batch. Duplicates are skipped silently (gossip
    /// redundancy); violations abort at the offending op, keeping every
    /// prior op applied, and the peer bookkeeping keeps whatever progress
    /// was made. Returns the number of ops actually merged.
    pub fn apply_batch(&mut self, batch: &OpBatch) -> Result<usize, BatchError> {
        let mut state = self
            .peers
            .get(&batch.sender)
            .cloned()
            .unwrap_or_else(|| PeerState::new(batch.sender));
        let result = self.apply_batch_inner(batch, &mut state);
        self.peers.insert(batch.sender, state);
        result
    }

    fn apply_batch_inner(
        &mut self,
        batch: &OpBatch,
        state: &mut PeerState,
    ) -> Result<usize, BatchError> {
        if batch.start_index == 0 || batch.start_index > state.known_length + 1 {
            // The batch starts past what we have consumed: accepting it
            // would silently skip part of the sender's log.
            return Err(BatchError {
                kind: BatchErrorKind::OutOfOrderIndex,
                position: batch.start_index,
                op: batch.ops.first().copied(),
                applied: 0,
            });
        }
        let old_known = state.known_length;
        let mut applied = 0usize;
        for (k, &op) in batch.ops.iter().enumerate() {
            let position = batch.start_index + k as u32;
            let fail = |kind, applied| BatchError { kind, position, op: Some(op), applied };
            // The sender's own ops must claim exactly the log position
            // that carries them.
            if op.id.author == batch.sender && op.id.andx != position {
                return Err(fail(BatchErrorKind::BadAuthorIndex, applied));
            }
            if position <= old_known {
                // Redelivery of a position we already consumed.
                if self.contains(op.id) {
                    continue;
                }
                return Err(fail(BatchErrorKind::OutOfOrderIndex, applied));
            }
            // Fresh position: the relay must keep every author's indices
            // strictly ascending, duplicates included.
            let link_hw = state.high_water.get(&op.id.author).copied().unwrap_or(0);
            if op.id.andx <= link_hw {
                return Err(fail(BatchErrorKind::OutOfOrderIndex, applied));
            }
            if self.contains(op.id) {
                state.high_water.insert(op.id.author, op.id.andx);
                state.known_length = position;
                continue;
            }
            // Novel op whose author index we have already passed: some log
            // this op belongs to was withheld from us earlier.
            if op.id.andx <= self.costructures().high_water(op.id.author) {
                return Err(fail(BatchErrorKind::OutOfOrderIndex, applied));
            }
            if !op.is_root() && !self.contains(op.parent) {
                return Err(fail(BatchErrorKind::UnknownRef, applied));
            }
            match self.merge_op(op) {
                Ok(_) => {
                    applied += 1;
                    state.high_water.insert(op.id.author, op.id.andx);
                    state.known_length = position;
                }
                Err(MergeError::DuplicateId(_)) => {
                    state.high_water.insert(op.id.author, op.id.andx);
                    state.known_length = position;
                }
                Err(MergeError::BadSelfIndex { .. }) => {
                    return Err(fail(BatchErrorKind::BadAuthorIndex, applied));
                }
                // An author index past our next log position means entries
                // from that author's prefix were never delivered.
                Err(MergeError::IndexAhead { .. }) => {
                    return Err(fail(BatchErrorKind::OutOfOrderIndex, applied));
                }
                Err(MergeError::RefNotMerged { .. } | MergeError::BadTombstoneTarget { .. }) => {
                    return Err(fail(BatchErrorKind::UnknownRef, applied));
                }
            }
        }
        Ok(applied)
    }
}

/// One-way anti-entropy step: bring `to` up to date with everything in
/// `from`'s log, routed through the wire encoding. Returns ops merged.
pub fn sync(from: &Doc, to: &mut Doc) -> Result<usize, SyncError> {
    let n = to.peer_known_length(from.author());
    let batch = from.ops_since(n)?;
    let wire = encode_batch(&batch);
    let batch = decode_batch(&wire)?;
    Ok(to.apply_batch(&batch)?)
}
