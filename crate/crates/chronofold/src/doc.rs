//! One replica's document: log, chronofold, and co-structures mutated in
//! lockstep behind a single-writer API.
//!
//! Everything lands through [`Doc::merge_op`] or the two local-edit entry
//! points, which are thin op factories in front of the same placement
//! routine. Placement is append-plus-relink: the new entry goes at the end
//! of the array, and exactly one existing weave link is rewritten.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::author::Author;
use crate::chronofold::{Chronofold, Weave};
use crate::costructs::{Attribute, CoStructures, FormatRangeError, IndexOutOfRange};
use crate::log::ReplicaLog;
use crate::op::{Op, OpValue};
use crate::replication::PeerState;
use crate::timestamp::{LogIndex, Timestamp};

/// A version is a log-prefix length: "the document as of my k-th entry".
/// Purely local naming; two replicas' `Version(4)` are unrelated.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Version(pub u32);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VersionError {
    #[error("version {k} is out of range (log length {len})")]
    OutOfRange { k: u32, len: u32 },
    #[error("version pair is not ordered: {i} > {j}")]
    Unordered { i: u32, j: u32 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EditError {
    #[error("insert anchor {index} is not the root or a live character (length {len})")]
    InvalidAnchor { index: u32, len: u32 },
    #[error("delete target {index} is not a live character (length {len})")]
    InvalidTarget { index: u32, len: u32 },
    #[error("text position {pos} is out of range (visible length {len})")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("document has no root yet")]
    NoRoot,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeError {
    #[error("op {0} is already merged")]
    DuplicateId(Timestamp),
    #[error("op {id} references {parent}, which is not merged here")]
    RefNotMerged { id: Timestamp, parent: Timestamp },
    #[error("own-authored op {id} must claim log position {expected}")]
    BadSelfIndex { id: Timestamp, expected: u32 },
    #[error("op {id} claims an author index ahead of this log (length {len})")]
    IndexAhead { id: Timestamp, len: u32 },
    #[error("tombstone {id} targets {target}, which is not a character")]
    BadTombstoneTarget { id: Timestamp, target: Timestamp },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line} has no anchor (document has {lines})")]
pub struct LineOutOfRange {
    pub line: usize,
    pub lines: usize,
}

/// A replica's document. `new` starts a fresh one (the replica authors the
/// root); `join` starts empty, expecting the root to arrive via merge.
#[derive(Clone, Debug)]
pub struct Doc {
    log: ReplicaLog,
    fold: Chronofold,
    cs: CoStructures,
    pub(crate) peers: BTreeMap<Author, PeerState>,
}

impl Doc {
    pub fn new(author: Author) -> Self {
        let mut doc = Doc::join(author);
        doc.merge_op(Op::root(author)).expect("root merges into an empty doc");
        doc
    }

    pub fn join(author: Author) -> Self {
        Doc {
            log: ReplicaLog::new(author),
            fold: Chronofold::new(),
            cs: CoStructures::new(),
            peers: BTreeMap::new(),
        }
    }

    pub fn author(&self) -> Author {
        self.log.author()
    }

    /// Log length (and chronofold length; they are always equal).
    pub fn len(&self) -> u32 {
        self.fold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold.is_empty()
    }

    pub fn log(&self) -> &ReplicaLog {
        &self.log
    }

    pub fn fold(&self) -> &Chronofold {
        &self.fold
    }

    pub fn costructures(&self) -> &CoStructures {
        &self.cs
    }

    pub fn weave(&self) -> Weave<'_> {
        self.fold.weave()
    }

    pub fn inverse_ndx(&self, j: LogIndex) -> Result<Timestamp, IndexOutOfRange> {
        self.cs.inverse_ndx(j)
    }

    pub fn fast_ndx(&mut self, t: Timestamp) -> Option<LogIndex> {
        self.cs.fast_ndx(t)
    }

    /// Whether the op with this timestamp has been merged.
    pub fn contains(&self, t: Timestamp) -> bool {
        self.cs.contains(t)
    }

    // ── ingesting ops ───────────────────────────────────────────────────

    /// Merge one op whose parent is already here. The caller owns causal
    /// delivery; this checks what it can per-op and then places the entry.
    pub fn merge_op(&mut self, op: Op) -> Result<LogIndex, MergeError> {
        let id = op.id;
        let next_pos = self.fold.len() + 1;
        if self.cs.contains(id) {
            return Err(MergeError::DuplicateId(id));
        }
        if id.andx > next_pos {
            return Err(MergeError::IndexAhead { id, len: self.fold.len() });
        }
        if id.author == self.log.author() && id.andx != next_pos {
            return Err(MergeError::BadSelfIndex { id, expected: next_pos });
        }
        if op.val == OpValue::Root {
            if !self.fold.is_empty() {
                // A second root can never attach: its parent (itself) is
                // not the root we already have.
                return Err(MergeError::RefNotMerged { id, parent: op.parent });
            }
            let j = self.fold.push(OpValue::Root, None);
            self.cs.append_entry(id, LogIndex::ROOT, OpValue::Root);
            self.cs.set_next(j, None);
            self.log.push_unchecked(op);
            return Ok(j);
        }
        let Some(parent_idx) = self.cs.fast_ndx(op.parent) else {
            return Err(MergeError::RefNotMerged { id, parent: op.parent });
        };
        if op.val == OpValue::Tombstone && !self.entry_val(parent_idx).is_char() {
            return Err(MergeError::BadTombstoneTarget { id, target: op.parent });
        }
        Ok(self.place(op, parent_idx))
    }

    /// Author a new character directly after `after`, which must be the
    /// root or a live character. Returns the op for replication.
    pub fn local_insert(&mut self, after: LogIndex, ch: char) -> Result<Op, EditError> {
        let ok = match self.fold.get(after).map(|e| e.val) {
            Some(OpValue::Root) => true,
            Some(OpValue::Char(_)) => self.cs.is_live(after),
            Some(OpValue::Tombstone) | None => false,
        };
        if !ok {
            return Err(EditError::InvalidAnchor { index: after.get(), len: self.fold.len() });
        }
        let id = Timestamp::new(self.fold.len() + 1, self.author());
        let parent = self.cs.inverse_ndx(after).expect("anchor checked in range");
        let op = Op::new(id, parent, OpValue::Char(ch))
            .expect("a fresh local index is above any merged parent");
        self.place(op, after);
        Ok(op)
    }

    /// Author a tombstone for the live character at `target`.
    pub fn local_delete(&mut self, target: LogIndex) -> Result<Op, EditError> {
        let is_char = matches!(self.fold.get(target).map(|e| e.val), Some(OpValue::Char(_)));
        if !is_char || !self.cs.is_live(target) {
            return Err(EditError::InvalidTarget { index: target.get(), len: self.fold.len() });
        }
        let id = Timestamp::new(self.fold.len() + 1, self.author());
        let parent = self.cs.inverse_ndx(target).expect("target checked in range");
        let op = Op::new(id, parent, OpValue::Tombstone)
            .expect("a fresh local index is above any merged parent");
        self.place(op, target);
        Ok(op)
    }

    /// Append the entry and splice it into the weave directly after its
    /// parent's run of preemptive siblings.
    ///
    /// The scan advances while the cursor's timestamp is ATO-greater than
    /// the new id. That skips whole sibling subtrees, not just siblings:
    /// a descendant always carries a larger author index than its ancestor,
    /// so everything inside a greater sibling's subtree compares greater
    /// too. Locally authored ops carry the maximal timestamp and the scan
    /// exits immediately.
    fn place(&mut self, op: Op, parent_idx: LogIndex) -> LogIndex {
        let mut pred = parent_idx;
        let mut cursor = self.fold.next(pred);
        while let Some(c) = cursor {
            let cid = self.cs.inverse_ndx(c).expect("weave cursor is in range");
            if cid > op.id {
                pred = c;
                cursor = self.fold.next(c);
            } else {
                break;
            }
        }
        let j = self.fold.push(op.val, cursor);
        self.fold.set_next(pred, Some(j));
        self.cs.append_entry(op.id, parent_idx, op.val);
        self.cs.set_next(j, cursor);
        self.cs.set_next(pred, Some(j));
        self.log.push_unchecked(op);
        match op.val {
            OpValue::Char('\n') => self.cs.invalidate_toc(),
            OpValue::Tombstone => {
                self.cs.kill(parent_idx, j);
                if self.entry_val(parent_idx) == OpValue::Char('\n') {
                    self.cs.invalidate_toc();
                }
            }
            _ => {}
        }
        j
    }

    fn entry_val(&self, j: LogIndex) -> OpValue {
        self.fold.get(j).expect("index checked in range").val
    }

    // ── text coordinates ────────────────────────────────────────────────

    /// Number of visible characters.
    pub fn visible_len(&self) -> usize {
        self.cs.live_count() as usize
    }

    /// Log index of the 0-based `pos`-th visible character.
    pub fn visible_index(&self, pos: usize) -> Option<LogIndex> {
        let mut seen = 0;
        for j in self.weave() {
            if self.cs.is_live(j) {
                if seen == pos {
                    return Some(j);
                }
                seen += 1;
            }
        }
        None
    }

    /// Anchor for inserting at text position `pos`: the root for 0, else
    /// the character currently at `pos - 1`.
    pub fn insert_anchor(&self, pos: usize) -> Option<LogIndex> {
        if pos == 0 {
            if self.fold.is_empty() {
                None
            } else {
                Some(LogIndex::ROOT)
            }
        } else {
            self.visible_index(pos - 1)
        }
    }

    /// Type `text` at visible position `pos`; each character references the
    /// previous one, so the ops form a span with consecutive indices.
    pub fn insert_text(&mut self, pos: usize, text: &str) -> Result<Vec<Op>, EditError> {
        if pos > self.visible_len() {
            return Err(EditError::PositionOutOfRange { pos, len: self.visible_len() });
        }
        let mut anchor = match self.insert_anchor(pos) {
            Some(a) => a,
            None if self.fold.is_empty() => return Err(EditError::NoRoot),
            None => return Err(EditError::PositionOutOfRange { pos, len: self.visible_len() }),
        };
        let mut ops = Vec::new();
        for ch in text.chars() {
            ops.push(self.local_insert(anchor, ch).expect("chain anchor stays live"));
            anchor = LogIndex::new(self.fold.len()).unwrap();
        }
        Ok(ops)
    }

    /// Delete `count` visible characters starting at `pos`.
    pub fn delete_text(&mut self, pos: usize, count: usize) -> Result<Vec<Op>, EditError> {
        let end = pos.checked_add(count);
        if end.is_none() || end.unwrap() > self.visible_len() {
            return Err(EditError::PositionOutOfRange {
                pos: end.unwrap_or(usize::MAX),
                len: self.visible_len(),
            });
        }
        let mut ops = Vec::with_capacity(count);
        for _ in 0..count {
            let target = self.visible_index(pos).expect("range checked above");
            ops.push(self.local_delete(target).expect("visible characters are live"));
        }
        Ok(ops)
    }

    // ── rendering ───────────────────────────────────────────────────────

    /// The visible text: weave order, live characters only.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for j in self.weave() {
            if let Some(&crate::chronofold::Entry { val: OpValue::Char(c), .. }) = self.fold.get(j)
            {
                if self.cs.is_live(j) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// The text as of log prefix `v`: entries past `v` do not exist yet,
    /// and a character is dead only if some tombstone within the prefix
    /// targets it.
    pub fn render_version(&self, v: Version) -> Result<String, VersionError> {
        let k = v.0;
        if k < 1 || k > self.fold.len() {
            return Err(VersionError::OutOfRange { k, len: self.fold.len() });
        }
        let mut out = String::new();
        for j in self.weave() {
            if let Some(&crate::chronofold::Entry { val: OpValue::Char(c), .. }) = self.fold.get(j)
            {
                if self.live_at(j, k) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// Whether character entry `j` exists and is alive at prefix length `k`.
    pub(crate) fn live_at(&self, j: LogIndex, k: u32) -> bool {
        j.get() <= k && self.cs.killed_at(j).is_none_or(|t| t.get() > k)
    }

    /// Log index from which weave iteration yields line `line` (1-based).
    /// Line 1 anchors at the root; line n at the weave successor of the
    /// (n-1)-th live newline. A newline at the very end of the weave anchors
    /// nothing, so the line after it is out of range.
    pub fn line_start(&mut self, line: usize) -> Result<LogIndex, LineOutOfRange> {
        if self.cs.toc_if_valid().is_none() {
            let toc: Vec<LogIndex> = self
                .weave()
                .filter(|&j| self.entry_val(j) == OpValue::Char('\n') && self.cs.is_live(j))
                .collect();
            self.cs.store_toc(toc);
        }
        let toc = self.cs.toc_if_valid().expect("just rebuilt");
        let anchored = |nl: LogIndex| self.cs.weave_next(nl).expect("toc entry in range");
        let lines = if self.fold.is_empty() {
            0
        } else {
            1 + toc.iter().filter(|&&nl| anchored(nl).is_some()).count()
        };
        match line {
            1 if !self.fold.is_empty() => Ok(LogIndex::ROOT),
            n if n >= 2 => toc
                .get(n - 2)
                .copied()
                .and_then(anchored)
                .ok_or(LineOutOfRange { line, lines }),
            _ => Err(LineOutOfRange { line, lines }),
        }
    }

    // ── formatting ──────────────────────────────────────────────────────

    /// Attach `attr` to log indices `from..to`. Attributes stick to log
    /// indices, so later edits elsewhere never shift them.
    pub fn set_format(
        &mut self,
        from: LogIndex,
        to: LogIndex,
        attr: Attribute,
    ) -> Result<(), FormatRangeError> {
        self.cs.set_format(from, to, attr)
    }

    pub fn format_at(&self, j: LogIndex) -> Result<Attribute, IndexOutOfRange> {
        self.cs.get_format(j)
    }

    // ── rebase ──────────────────────────────────────────────────────────

    /// Re-express the current text as a single sequential insertion under
    /// this replica's authorship: fresh root, one char op per visible
    /// character, each referencing its predecessor. History, tombstones,
    /// and formatting are discarded; the rendered text is preserved.
    pub fn rebase(&self) -> Doc {
        let mut out = Doc::new(self.author());
        let mut anchor = LogIndex::ROOT;
        for j in self.weave() {
            if let Some(&crate::chronofold::Entry { val: OpValue::Char(c), .. }) = self.fold.get(j)
            {
                if self.cs.is_live(j) {
                    out.local_insert(anchor, c).expect("sequential rebuild");
                    anchor = LogIndex::new(out.fold.len()).unwrap();
                }
            }
        }
        out
    }

    // ── self-checks (test and fuzz support) ─────────────────────────────

    /// Cross-checks every redundant representation against the log, which
    /// is the ground truth. Returns human-readable problems; empty = sound.
    pub fn check_integrity(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let n = self.fold.len();
        if self.log.len() != n || self.cs.len() != n {
            problems.push(format!(
                "length skew: log {} fold {} costructs {}",
                self.log.len(),
                n,
                self.cs.len()
            ));
            return problems;
        }
        if !self.fold.weave_is_permutation() {
            problems.push("weave links do not visit every entry exactly once".into());
        }
        let position: HashMap<Timestamp, LogIndex> = self
            .log
            .entries()
            .iter()
            .enumerate()
            .map(|(i, op)| (op.id, LogIndex::new(i as u32 + 1).unwrap()))
            .collect();
        // Recompute liveness from scratch: earliest tombstone per target.
        let mut killed: BTreeMap<LogIndex, LogIndex> = BTreeMap::new();
        for (i, op) in self.log.entries().iter().enumerate() {
            if op.val == OpValue::Tombstone {
                let here = LogIndex::new(i as u32 + 1).unwrap();
                if let Some(&target) = position.get(&op.parent) {
                    killed.entry(target).or_insert(here);
                }
            }
        }
        let mut live_count = 0u32;
        for (i, op) in self.log.entries().iter().enumerate() {
            let j = LogIndex::new(i as u32 + 1).unwrap();
            let entry = self.fold.get(j).unwrap();
            if entry.val != op.val {
                problems.push(format!("entry {j}: fold value {:?} != log {:?}", entry.val, op.val));
            }
            match self.cs.inverse_ndx(j) {
                Ok(id) if id == op.id => {}
                got => problems.push(format!("entry {j}: inverse_ndx {got:?} != id {}", op.id)),
            }
            if self.cs.weave_next(j) != Ok(entry.next) {
                problems.push(format!("entry {j}: sparse next disagrees with fold"));
            }
            let expect_parent = if op.is_root() { Some(j) } else { position.get(&op.parent).copied() };
            match (self.cs.parent_ndx(j), expect_parent) {
                (Ok(p), Some(e)) if p == e => {}
                (got, want) => problems.push(format!("entry {j}: parent {got:?} != {want:?}")),
            }
            let expect_live = op.val.is_char() && !killed.contains_key(&j);
            if self.cs.is_live(j) != expect_live {
                problems.push(format!("entry {j}: liveness bit {}", self.cs.is_live(j)));
            }
            if self.cs.killed_at(j) != killed.get(&j).copied() {
                problems.push(format!("entry {j}: killed_at {:?}", self.cs.killed_at(j)));
            }
            if expect_live {
                live_count += 1;
            }
        }
        if self.cs.live_count() != live_count {
            problems.push(format!(
                "live_count {} != recount {live_count}",
                self.cs.live_count()
            ));
        }
        let mut hw: BTreeMap<Author, u32> = BTreeMap::new();
        for op in self.log.entries() {
            let e = hw.entry(op.id.author).or_insert(0);
            *e = (*e).max(op.id.andx);
        }
        for (author, max) in hw {
            if self.cs.high_water(author) != max {
                problems.push(format!("high water for {author}: {}", self.cs.high_water(author)));
            }
        }
        problems
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{author, op, pinsk_ops, pinsk_reception, ts};

    fn pinsk_doc(name: &str) -> Doc {
        let ops = pinsk_ops();
        let mut doc = Doc::join(author(name));
        for k in pinsk_reception(name) {
            doc.merge_op(ops[k]).unwrap();
        }
        doc
    }

    fn weave_positions(doc: &Doc) -> Vec<u32> {
        doc.weave().map(LogIndex::get).collect()
    }

    #[test]
    fn fixture_replicas_converge() {
        let alpha = pinsk_doc("alpha");
        let beta = pinsk_doc("beta");
        let gamma = pinsk_doc("gamma");
        assert_eq!(alpha.render_text(), "PINSK");
        assert_eq!(beta.render_text(), "PINSK");
        assert_eq!(gamma.render_text(), "PINS");
        assert_eq!((alpha.len(), beta.len(), gamma.len()), (8, 8, 7));
        assert_eq!(weave_positions(&alpha), vec![1, 2, 3, 6, 4, 5, 7, 8]);
        assert_eq!(weave_positions(&beta), vec![1, 2, 4, 5, 3, 6, 7, 8]);
        assert_eq!(weave_positions(&gamma), vec![1, 2, 3, 5, 4, 6, 7]);
        for doc in [&alpha, &beta, &gamma] {
            assert_eq!(doc.check_integrity(), Vec::<String>::new());
        }
    }

    #[test]
    fn fixture_costructures_take_expected_shape() {
        let alpha = pinsk_doc("alpha");
        let cs = alpha.costructures();
        assert_eq!(
            cs.author_spans().collect::<Vec<_>>(),
            vec![
                (1, author("alpha")),
                (2, author("beta")),
                (3, author("gamma")),
                (4, author("beta")),
                (5, author("alpha")),
                (6, author("gamma")),
                (8, author("beta")),
            ],
        );
        assert_eq!(
            cs.shift_spans().collect::<Vec<_>>(),
            vec![(1, 0), (4, 1), (5, 0), (6, 1), (7, 0)],
        );
        assert_eq!(cs.ref_entries().collect::<Vec<_>>(), vec![(1, 1), (4, 2), (6, 3), (7, 5)]);
        assert_eq!(cs.next_entries().collect::<Vec<_>>(), vec![(3, 6), (5, 7), (6, 4), (8, 0)]);
        assert_eq!(alpha.inverse_ndx(LogIndex::new(4).unwrap()), Ok(ts(3, "beta")));
    }

    #[test]
    fn fast_and_inverse_agree_with_the_log() {
        for name in ["alpha", "beta", "gamma"] {
            let mut doc = pinsk_doc(name);
            for i in 0..doc.log().entries().len() {
                let id = doc.log().entries()[i].id;
                let j = LogIndex::new(i as u32 + 1).unwrap();
                assert_eq!(doc.fast_ndx(id), Some(j), "{name} {id}");
                assert_eq!(doc.inverse_ndx(j), Ok(id), "{name} {j:?}");
                assert_eq!(doc.log().ndx(id), Some(j));
            }
        }
        let mut gamma = pinsk_doc("gamma");
        assert_eq!(gamma.fast_ndx(ts(8, "beta")), None);
        assert_eq!(gamma.log().ndx(ts(8, "beta")), None);
    }

    #[test]
    fn versions_replay_history() {
        let alpha = pinsk_doc("alpha");
        // alpha's log: root, M, tombstone, I, N, P, S, K.
        assert_eq!(alpha.render_version(Version(1)).unwrap(), "");
        assert_eq!(alpha.render_version(Version(2)).unwrap(), "M");
        assert_eq!(alpha.render_version(Version(3)).unwrap(), "");
        assert_eq!(alpha.render_version(Version(4)).unwrap(), "I");
        assert_eq!(alpha.render_version(Version(7)).unwrap(), "PINS");
        assert_eq!(alpha.render_version(Version(8)).unwrap(), alpha.render_text());
        assert_eq!(
            alpha.render_version(Version(0)),
            Err(VersionError::OutOfRange { k: 0, len: 8 }),
        );
        assert_eq!(
            alpha.render_version(Version(9)),
            Err(VersionError::OutOfRange { k: 9, len: 8 }),
        );
    }

    #[test]
    fn sequential_typing_keeps_log_order() {
        let mut doc = Doc::new(author("solo"));
        doc.insert_text(0, "PINSK").unwrap();
        assert_eq!(doc.render_text(), "PINSK");
        assert_eq!(weave_positions(&doc), vec![1, 2, 3, 4, 5, 6]);
        doc.delete_text(1, 2).unwrap();
        assert_eq!(doc.render_text(), "PSK");
        doc.insert_text(1, "LA").unwrap();
        assert_eq!(doc.render_text(), "PLASK");
        assert_eq!(doc.check_integrity(), Vec::<String>::new());
    }

    #[test]
    fn edit_preconditions() {
        let mut doc = Doc::new(author("solo"));
        doc.insert_text(0, "AB").unwrap();
        let b = doc.visible_index(1).unwrap();
        doc.local_delete(b).unwrap();
        // The tombstone entry and the dead char are both unusable anchors.
        let tomb = LogIndex::new(4).unwrap();
        assert_eq!(
            doc.local_insert(tomb, 'x'),
            Err(EditError::InvalidAnchor { index: 4, len: 4 }),
        );
        assert_eq!(doc.local_insert(b, 'x'), Err(EditError::InvalidAnchor { index: 3, len: 4 }));
        assert_eq!(
            doc.local_insert(LogIndex::new(9).unwrap(), 'x'),
            Err(EditError::InvalidAnchor { index: 9, len: 4 }),
        );
        assert_eq!(doc.local_delete(b), Err(EditError::InvalidTarget { index: 3, len: 4 }));
        assert_eq!(
            doc.local_delete(LogIndex::ROOT),
            Err(EditError::InvalidTarget { index: 1, len: 4 }),
        );
        assert_eq!(
            doc.insert_text(5, "y"),
            Err(EditError::PositionOutOfRange { pos: 5, len: 1 }),
        );
        assert_eq!(
            doc.delete_text(0, 2),
            Err(EditError::PositionOutOfRange { pos: 2, len: 1 }),
        );
        // A joined replica has nothing to anchor to until the root arrives.
        let mut late = Doc::join(author("late"));
        assert_eq!(late.insert_text(0, "x"), Err(EditError::NoRoot));
    }

    #[test]
    fn merge_rejections() {
        let mut doc = pinsk_doc("alpha");
        let ops = pinsk_ops();
        assert_eq!(doc.merge_op(ops[1]), Err(MergeError::DuplicateId(ts(2, "beta"))));
        let mut gamma = pinsk_doc("gamma");
        let dangling = op(8, "beta", 7, "beta", OpValue::Char('!'));
        assert_eq!(
            gamma.merge_op(dangling),
            Err(MergeError::RefNotMerged { id: ts(8, "beta"), parent: ts(7, "beta") }),
        );
        // Forged op in our own name at the wrong position.
        let forged = op(3, "alpha", 1, "alpha", OpValue::Char('z'));
        assert_eq!(
            doc.merge_op(forged),
            Err(MergeError::BadSelfIndex { id: ts(3, "alpha"), expected: 9 }),
        );
        // Author index no honest log could have produced yet.
        let ahead = op(12, "delta", 1, "alpha", OpValue::Char('z'));
        assert_eq!(doc.merge_op(ahead), Err(MergeError::IndexAhead { id: ts(12, "delta"), len: 8 }));
        // Tombstone aimed at the root.
        let bad_tomb = op(9, "delta", 1, "alpha", OpValue::Tombstone);
        assert_eq!(
            doc.merge_op(bad_tomb),
            Err(MergeError::BadTombstoneTarget { id: ts(9, "delta"), target: ts(1, "alpha") }),
        );
        // A competing root cannot attach anywhere.
        let other_root = Op::root(author("delta"));
        assert_eq!(
            doc.merge_op(other_root),
            Err(MergeError::RefNotMerged { id: ts(1, "delta"), parent: ts(1, "delta") }),
        );
    }

    #[test]
    fn line_anchors_follow_live_newlines() {
        let mut doc = Doc::new(author("solo"));
        doc.insert_text(0, "AB\nCD").unwrap();
        assert_eq!(doc.line_start(1), Ok(LogIndex::ROOT));
        let second = doc.line_start(2).unwrap();
        assert_eq!(doc.visible_index(3), Some(second)); // 'C'
        assert_eq!(doc.line_start(3), Err(LineOutOfRange { line: 3, lines: 2 }));
        assert_eq!(doc.line_start(0), Err(LineOutOfRange { line: 0, lines: 2 }));
        // Kill the newline: one line again.
        doc.delete_text(2, 1).unwrap();
        assert_eq!(doc.render_text(), "ABCD");
        assert_eq!(doc.line_start(2), Err(LineOutOfRange { line: 2, lines: 1 }));
        // A newline at the weave end has no successor to anchor.
        let mut tail = Doc::new(author("solo"));
        tail.insert_text(0, "AB\n").unwrap();
        assert_eq!(tail.line_start(2), Err(LineOutOfRange { line: 2, lines: 1 }));
    }

    #[test]
    fn formats_stick_to_log_indices() {
        let mut doc = Doc::new(author("solo"));
        doc.insert_text(0, "PINSK").unwrap();
        let bold = Attribute(7);
        let i = doc.visible_index(1).unwrap(); // 'I' sits at log index 3
        let s = doc.visible_index(3).unwrap();
        doc.set_format(i, s, bold).unwrap();
        assert_eq!(doc.format_at(i), Ok(bold));
        assert_eq!(doc.format_at(s), Ok(Attribute::PLAIN));
        // Inserting earlier text moves visible positions but not indices.
        doc.insert_text(0, "xy").unwrap();
        assert_eq!(doc.format_at(i), Ok(bold));
    }

    #[test]
    fn rebase_flattens_history() {
        let alpha = pinsk_doc("alpha");
        let flat = alpha.rebase();
        assert_eq!(flat.render_text(), "PINSK");
        assert_eq!(flat.author(), author("alpha"));
        assert_eq!(flat.len(), 6);
        assert_eq!(flat.costructures().author_spans().count(), 1);
        assert_eq!(flat.costructures().shift_spans().count(), 1);
        assert_eq!(flat.costructures().next_entries().count(), 1);
        assert_eq!(flat.check_integrity(), Vec::<String>::new());

        let empty = Doc::join(author("solo")).rebase();
        assert_eq!(empty.len(), 1);
        assert_eq!(empty.render_text(), "");
    }

    #[test]
    fn concurrent_children_order_by_timestamp() {
        // Two replicas type different first characters concurrently.
        let mut a = Doc::new(author("alpha"));
        let a_op = a.local_insert(LogIndex::ROOT, 'a').unwrap();
        let mut b = Doc::join(author("beta"));
        b.merge_op(Op::root(author("alpha"))).unwrap();
        let b_op = b.local_insert(LogIndex::ROOT, 'b').unwrap();
        a.merge_op(b_op).unwrap();
        b.merge_op(a_op).unwrap();
        // <2,beta> > <2,alpha>, so 'b' wins the slot next to the root.
        assert_eq!(a.render_text(), "ba");
        assert_eq!(b.render_text(), "ba");
    }
}
