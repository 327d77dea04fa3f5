//! Side tables keyed by log index. The chronofold proper stores payloads
//! and weave links; everything else a replica needs (which timestamp a
//! log index stands for, where an op's parent sits, which chars are still
//! alive, where lines begin) lives here in compressed sorted maps so the
//! whole structure stays cheap to append to and cheap to look things up in.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::author::Author;
use crate::op::OpValue;
use crate::timestamp::{LogIndex, Timestamp};

/// Scan budget for `fast_ndx`: a lookup that walks further than this past
/// its starting guess records a shift-table entry so the next lookup for
/// that neighborhood starts where this one ended up.
pub const SHIFT_SCAN_THRESHOLD: u32 = 16;

/// Opaque formatting attribute. 0 is the unformatted default.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Attribute(pub u32);

impl Attribute {
    pub const PLAIN: Attribute = Attribute(0);
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("log index {index} is out of range (length {len})")]
pub struct IndexOutOfRange {
    pub index: u32,
    pub len: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatRangeError {
    #[error(transparent)]
    OutOfRange(#[from] IndexOutOfRange),
    #[error("format range is empty (from {from}, to {to})")]
    Empty { from: u32, to: u32 },
}

#[derive(Clone, Debug, Default)]
struct Bitmap {
    words: Vec<u64>,
    len: u32,
}

impl Bitmap {
    fn push(&mut self, bit: bool) {
        let slot = self.len as usize;
        if slot % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[slot / 64] |= 1 << (slot % 64);
        }
        self.len += 1;
    }

    fn get(&self, slot: u32) -> bool {
        self.words[slot as usize / 64] >> (slot % 64) & 1 == 1
    }

    fn clear(&mut self, slot: u32) {
        self.words[slot as usize / 64] &= !(1 << (slot % 64));
    }
}

/// All co-structures of one replica, updated in lockstep with its log and
/// chronofold.
///
/// - `authors` and `shifts` compress per-entry timestamps into spans: the
///   timestamp at index j is `<j - shift_at(j), author_at(j)>`.
/// - `refs` stores parent positions only where they differ from `j - 1`
///   (the root points at itself).
/// - `next` mirrors the chronofold's weave links sparsely: absent means
///   `j + 1`, the single explicit 0 marks the weave end.
/// - `shift_table` amortizes `fast_ndx` scans, per author, andx -> shift.
/// - `formats` partitions indexed entries into attribute spans.
/// - `toc` caches live newline positions in weave order until an edit
///   touches a newline.
/// - `live` has bit 1 exactly for Char entries with no tombstone child;
///   `killed_at` remembers the earliest tombstone per dead char so any
///   log prefix can be rendered.
#[derive(Clone, Debug, Default)]
pub struct CoStructures {
    len: u32,
    authors: BTreeMap<u32, Author>,
    shifts: BTreeMap<u32, u32>,
    refs: BTreeMap<u32, u32>,
    next: BTreeMap<u32, u32>,
    shift_table: BTreeMap<Author, BTreeMap<u32, u32>>,
    formats: BTreeMap<u32, Attribute>,
    toc: Vec<LogIndex>,
    toc_valid: bool,
    live: Bitmap,
    live_count: u32,
    killed_at: BTreeMap<u32, u32>,
    high_water: BTreeMap<Author, u32>,
}

impl CoStructures {
    pub fn new() -> Self {
        CoStructures { toc_valid: true, ..Default::default() }
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check(&self, j: LogIndex) -> Result<(), IndexOutOfRange> {
        if j.get() > self.len {
            return Err(IndexOutOfRange { index: j.get(), len: self.len });
        }
        Ok(())
    }

    fn author_at(&self, j: u32) -> Author {
        *self.authors.range(..=j).next_back().expect("author span covers every index").1
    }

    fn shift_at(&self, j: u32) -> u32 {
        *self.shifts.range(..=j).next_back().expect("shift span covers every index").1
    }

    fn id_at(&self, j: u32) -> Timestamp {
        Timestamp::new(j - self.shift_at(j), self.author_at(j))
    }

    /// The timestamp recorded at log index `j`, reconstructed from the
    /// author and shift spans alone.
    pub fn inverse_ndx(&self, j: LogIndex) -> Result<Timestamp, IndexOutOfRange> {
        self.check(j)?;
        Ok(self.id_at(j.get()))
    }

    /// Log index of timestamp `t`, or `None` if `t` was never merged.
    ///
    /// Absence is settled in one comparison against the author's high-water
    /// mark. Presence starts from `t.andx` plus the best recorded shift at
    /// or below it and scans forward. The shift table is a hint, not an
    /// invariant: an author's shift shrinks whenever its index jumps over a
    /// run of entries it merged from others, so a hint can overshoot; a
    /// primary-scan miss rescans the range the hint skipped. Scans that
    /// drift past [`SHIFT_SCAN_THRESHOLD`], and any overshoot, record the
    /// true shift for next time.
    pub fn fast_ndx(&mut self, t: Timestamp) -> Option<LogIndex> {
        match self.high_water.get(&t.author) {
            Some(&hw) if t.andx <= hw => {}
            _ => return None,
        }
        let table_shift = self
            .shift_table
            .get(&t.author)
            .and_then(|tbl| tbl.range(..=t.andx).next_back().map(|(_, &s)| s))
            .unwrap_or(0);
        let guess = t.andx + table_shift;
        let mut pos = guess;
        while pos <= self.len {
            if self.id_at(pos) == t {
                if pos - guess > SHIFT_SCAN_THRESHOLD {
                    self.shift_table.entry(t.author).or_default().insert(t.andx, pos - t.andx);
                }
                return LogIndex::new(pos);
            }
            pos += 1;
        }
        let mut pos = t.andx;
        while pos < guess && pos <= self.len {
            if self.id_at(pos) == t {
                self.shift_table.entry(t.author).or_default().insert(t.andx, pos - t.andx);
                return LogIndex::new(pos);
            }
            pos += 1;
        }
        None
    }

    /// Presence test with the same fast path as `fast_ndx`, minus the
    /// table amortization.
    pub(crate) fn contains(&self, t: Timestamp) -> bool {
        match self.high_water.get(&t.author) {
            Some(&hw) if t.andx <= hw => {}
            _ => return false,
        }
        (t.andx..=self.len).any(|pos| self.id_at(pos) == t)
    }

    /// Highest author index merged for `author` (0 when none).
    pub fn high_water(&self, author: Author) -> u32 {
        self.high_water.get(&author).copied().unwrap_or(0)
    }

    /// Weave successor of `j` from the sparse map: stored value, else the
    /// default `j + 1`. `None` is the weave END.
    pub fn weave_next(&self, j: LogIndex) -> Result<Option<LogIndex>, IndexOutOfRange> {
        self.check(j)?;
        match self.next.get(&j.get()) {
            Some(&stored) => Ok(LogIndex::new(stored)),
            None => Ok(Some(j.succ())),
        }
    }

    /// Parent position of entry `j`: stored value, else the default `j - 1`.
    /// The root is its own parent.
    pub fn parent_ndx(&self, j: LogIndex) -> Result<LogIndex, IndexOutOfRange> {
        self.check(j)?;
        match self.refs.get(&j.get()) {
            Some(&stored) => Ok(LogIndex::new(stored).expect("stored parent is 1-based")),
            None => Ok(LogIndex::new(j.get() - 1).expect("only the root lacks a predecessor")),
        }
    }

    pub fn is_live(&self, j: LogIndex) -> bool {
        j.get() <= self.len && self.live.get(j.get() - 1)
    }

    /// Log index of the earliest tombstone targeting `j`, if any.
    pub fn killed_at(&self, j: LogIndex) -> Option<LogIndex> {
        self.killed_at.get(&j.get()).map(|&k| LogIndex::new(k).unwrap())
    }

    /// Number of live chars, i.e. the visible text length.
    pub fn live_count(&self) -> u32 {
        self.live_count
    }

    /// Apply `attr` to log indices `from..to` (half-open). Anything the
    /// span previously covered keeps applying from `to` onward.
    pub fn set_format(
        &mut self,
        from: LogIndex,
        to: LogIndex,
        attr: Attribute,
    ) -> Result<(), FormatRangeError> {
        self.check(from)?;
        if to.get() > self.len + 1 {
            return Err(IndexOutOfRange { index: to.get(), len: self.len }.into());
        }
        if to <= from {
            return Err(FormatRangeError::Empty { from: from.get(), to: to.get() });
        }
        let resumed = if to.get() <= self.len { Some(self.format_at_raw(to.get())) } else { None };
        let inside: Vec<u32> = self.formats.range(from.get()..to.get()).map(|(&k, _)| k).collect();
        for k in inside {
            self.formats.remove(&k);
        }
        self.formats.insert(from.get(), attr);
        if let Some(old) = resumed {
            self.formats.insert(to.get(), old);
        }
        Ok(())
    }

    fn format_at_raw(&self, j: u32) -> Attribute {
        self.formats.range(..=j).next_back().map(|(_, &a)| a).unwrap_or(Attribute::PLAIN)
    }

    /// Attribute covering entry `j`; `Attribute::PLAIN` before any set.
    pub fn get_format(&self, j: LogIndex) -> Result<Attribute, IndexOutOfRange> {
        self.check(j)?;
        Ok(self.format_at_raw(j.get()))
    }

    // ── maintenance, driven by the owning document ──────────────────────

    /// Record the entry at position `len + 1`. Weave links are mirrored
    /// separately through `set_next`.
    pub(crate) fn append_entry(&mut self, id: Timestamp, parent: LogIndex, val: OpValue) {
        self.len += 1;
        let j = self.len;
        debug_assert!(id.andx <= j, "a timestamp never exceeds its log position");

        if self.authors.is_empty() || self.author_at(j - 1) != id.author {
            self.authors.insert(j, id.author);
        }
        let shift = j - id.andx;
        if self.shifts.is_empty() || self.shift_at(j - 1) != shift {
            self.shifts.insert(j, shift);
        }
        if parent.get() != j - 1 {
            self.refs.insert(j, parent.get());
        }
        self.live.push(val.is_char());
        if val.is_char() {
            self.live_count += 1;
        }
        let hw = self.high_water.entry(id.author).or_insert(0);
        *hw = (*hw).max(id.andx);
    }

    /// Mirror one weave link. Keeps the sparse-default invariant: the value
    /// `j + 1` is erased, anything else (including END) is stored.
    pub(crate) fn set_next(&mut self, j: LogIndex, next: Option<LogIndex>) {
        let raw = next.map(LogIndex::get).unwrap_or(0);
        if raw == j.get() + 1 {
            self.next.remove(&j.get());
        } else {
            self.next.insert(j.get(), raw);
        }
    }

    /// A tombstone at `tombstone` killed the char at `target`.
    pub(crate) fn kill(&mut self, target: LogIndex, tombstone: LogIndex) {
        if self.live.get(target.get() - 1) {
            self.live.clear(target.get() - 1);
            self.live_count -= 1;
        }
        let entry = self.killed_at.entry(target.get()).or_insert(tombstone.get());
        *entry = (*entry).min(tombstone.get());
    }

    pub(crate) fn invalidate_toc(&mut self) {
        self.toc_valid = false;
    }

    pub(crate) fn store_toc(&mut self, toc: Vec<LogIndex>) {
        self.toc = toc;
        self.toc_valid = true;
    }

    pub(crate) fn toc_if_valid(&self) -> Option<&[LogIndex]> {
        self.toc_valid.then_some(self.toc.as_slice())
    }

    // ── span inspection, for dumps and tests ────────────────────────────

    pub fn author_spans(&self) -> impl Iterator<Item = (u32, Author)> + '_ {
        self.authors.iter().map(|(&k, &a)| (k, a))
    }

    pub fn shift_spans(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.shifts.iter().map(|(&k, &s)| (k, s))
    }

    pub fn ref_entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.refs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn next_entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.next.iter().map(|(&k, &n)| (k, n))
    }

    pub fn shift_table_len(&self, author: Author) -> usize {
        self.shift_table.get(&author).map_or(0, BTreeMap::len)
    }
}
