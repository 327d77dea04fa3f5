//! Diffs between two versions of the same document, expressed as splices
//! over the older version's visible text.
//!
//! Both versions are log prefixes of one replica, so a single weave pass
//! classifies every character by its liveness at each prefix length; no
//! general sequence alignment is needed, and characters common to both
//! versions are never rewritten.

use crate::doc::{Doc, Version, VersionError};
use crate::op::OpValue;

/// One range replacement: at `pos` in the old text, remove `delete_len`
/// characters and put `insert` in their place. Positions count characters,
/// not bytes. Never empty: at least one of the two halves does something.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Splice {
    pub pos: usize,
    pub delete_len: usize,
    pub insert: String,
}

impl Doc {
    /// Splices that rewrite version `i`'s text into version `j`'s, in
    /// ascending position order with adjacent changes coalesced. Characters
    /// live at both versions are left alone, which makes the result minimal.
    pub fn diff_versions(&self, i: Version, j: Version) -> Result<Vec<Splice>, VersionError> {
        let len = self.len();
        for k in [i.0, j.0] {
            if k < 1 || k > len {
                return Err(VersionError::OutOfRange { k, len });
            }
        }
        if i.0 > j.0 {
            return Err(VersionError::Unordered { i: i.0, j: j.0 });
        }
        let mut splices: Vec<Splice> = Vec::new();
        let mut cur: Option<Splice> = None;
        let mut pos = 0; // characters of version i passed so far
        for idx in self.weave() {
            let OpValue::Char(c) = self.fold().get(idx).expect("weave index in range").val else {
                continue;
            };
            let open = |pos| Splice { pos, delete_len: 0, insert: String::new() };
            match (self.live_at(idx, i.0), self.live_at(idx, j.0)) {
                (true, true) => {
                    // Common character: a boundary every splice stops at.
                    splices.extend(cur.take());
                    pos += 1;
                }
                (true, false) => {
                    cur.get_or_insert_with(|| open(pos)).delete_len += 1;
                    pos += 1;
                }
                (false, true) => {
                    cur.get_or_insert_with(|| open(pos)).insert.push(c);
                }
                (false, false) => {}
            }
        }
        splices.extend(cur);
        Ok(splices)
    }
}

/// Apply splices produced by [`Doc::diff_versions`] to the text they were
/// diffed from. Positions address the input text, so the list is applied
/// back to front. Positions must be in range for `text`.
pub fn apply_splices(text: &str, splices: &[Splice]) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for s in splices.iter().rev() {
        let tail = chars.split_off(s.pos);
        chars.extend(s.insert.chars());
        chars.extend(tail.into_iter().skip(s.delete_len));
    }
    chars.into_iter().collect()
}
