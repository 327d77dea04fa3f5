use crate::op::OpValue;
use crate::timestamp::LogIndex;

/// One slot of the chronofold: the op's payload plus the index of its weave
/// successor (`None` is the weave END).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Entry {
    pub val: OpValue,
    pub next: Option<LogIndex>,
}

/// Append-only array indexed like the owning replica's log: entry j holds
/// the payload of log entry j. The `next` links embed the weave, a linked
/// list that starts at entry 1 (the root), visits every entry exactly once,
/// and ends at the single entry whose `next` is END.
///
/// Entries are never moved or removed; a merge appends one entry and
/// rewrites exactly one existing `next` link.
#[derive(Clone, Debug, Default)]
pub struct Chronofold {
    entries: Vec<Entry>,
}

impl Chronofold {
    pub fn new() -> Self {
        Chronofold { entries: Vec::new() }
    }

    pub fn len(&self) -> u32 {
        self.entries.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: LogIndex) -> Option<&Entry> {
        self.entries.get(j.slot())
    }

    /// Weave successor of entry `j`; `None` is END. Panics on a bad index,
    /// which inside this crate always means a broken invariant.
    pub fn next(&self, j: LogIndex) -> Option<LogIndex> {
        self.entries[j.slot()].next
    }

    /// Append the next entry (log position len + 1) with the given successor.
    pub(crate) fn push(&mut self, val: OpValue, next: Option<LogIndex>) -> LogIndex {
        self.entries.push(Entry { val, next });
        LogIndex::new(self.len()).unwrap()
    }

    pub(crate) fn set_next(&mut self, j: LogIndex, next: Option<LogIndex>) {
        self.entries[j.slot()].next = next;
    }

    /// Log-order traversal of payloads.
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Weave-order traversal of log indices, starting at the root.
    pub fn weave(&self) -> Weave<'_> {
        let cursor = if self.entries.is_empty() { None } else { Some(LogIndex::ROOT) };
        Weave { fold: self, cursor }
    }

    /// Whether the weave links form a single list that starts at the root,
    /// visits every entry exactly once, and terminates. Test support.
    pub fn weave_is_permutation(&self) -> bool {
        let mut seen = vec![false; self.entries.len()];
        let mut count = 0usize;
        for j in self.weave() {
            if count > self.entries.len() || seen[j.slot()] {
                return false;
            }
            seen[j.slot()] = true;
            count += 1;
        }
        count == self.entries.len()
    }
}

pub struct Weave<'a> {
    fold: &'a Chronofold,
    cursor: Option<LogIndex>,
}

impl Iterator for Weave<'_> {
    type Item = LogIndex;

    fn next(&mut self) -> Option<LogIndex> {
        let j = self.cursor?;
        self.cursor = self.fold.next(j);
        Some(j)
    }
}
