use std::fmt;
use std::num::NonZeroU32;

use crate::author::Author;

/// Log timestamp `<andx, author>`.
///
/// `andx` is the op's 1-based position in its author's own subjective log,
/// so an author can assign it without any shared counter. Derived `Ord` is
/// lexicographic (`andx` first, author bytes second); that ordering is the
/// arbitrary total order (ATO) the merge scan and the oracle both use, and
/// it never orders an op before anything the op's author had already seen.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp {
    pub andx: u32,
    pub author: Author,
}

impl Timestamp {
    pub fn new(andx: u32, author: Author) -> Self {
        debug_assert!(andx >= 1, "author indices are 1-based");
        Timestamp { andx, author }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.andx, self.author)
    }
}

impl fmt::Debug for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.andx, self.author)
    }
}

/// 1-based position in one replica's log (equivalently, in its chronofold).
///
/// Wrapping `NonZeroU32` keeps `Option<LogIndex>` pointer-sized and reserves
/// the raw value 0 for the weave END sentinel in dumps and wire text.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogIndex(NonZeroU32);

impl LogIndex {
    pub const ROOT: LogIndex = LogIndex(NonZeroU32::MIN);

    pub fn new(one_based: u32) -> Option<Self> {
        NonZeroU32::new(one_based).map(LogIndex)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }

    /// Slot in a 0-based backing array.
    pub(crate) fn slot(self) -> usize {
        (self.0.get() - 1) as usize
    }

    pub(crate) fn succ(self) -> Self {
        LogIndex(self.0.checked_add(1).expect("log index overflow"))
    }
}

impl fmt::Display for LogIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for LogIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
