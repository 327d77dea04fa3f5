//! Brute-force reference model. Everything here recomputes from scratch
//! with the most literal algorithm available; the editing structures are
//! measured against these results in tests and in the fuzzer. Nothing in
//! this module is reused by the engine itself, so a bug cannot hide in
//! shared code.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::log::{PrefixOutOfRange, ReplicaLog};
use crate::op::{Op, OpValue};
use crate::timestamp::Timestamp;

/// A causally closed set of ops: exactly one root, every parent present,
/// one definition per id.
#[derive(Clone, Debug)]
pub struct OpSet {
    ops: BTreeMap<Timestamp, Op>,
    root: Timestamp,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("op set has no root")]
    NoRoot,
    #[error("op set has two roots, {0} and {1}")]
    TwoRoots(Timestamp, Timestamp),
    #[error("op {id} is defined twice with different content")]
    ConflictingOps { id: Timestamp },
    #[error("not causally closed: {needed_by} references missing {missing}")]
    NotCausallyClosed { missing: Timestamp, needed_by: Timestamp },
}

impl OpSet {
    pub fn from_ops<I: IntoIterator<Item = Op>>(iter: I) -> Result<Self, OracleError> {
        let mut ops: BTreeMap<Timestamp, Op> = BTreeMap::new();
        let mut root = None;
        for op in iter {
            if let Some(prev) = ops.insert(op.id, op) {
                if prev != op {
                    return Err(OracleError::ConflictingOps { id: op.id });
                }
            }
            if op.is_root() {
                match root {
                    None => root = Some(op.id),
                    Some(r) if r == op.id => {}
                    Some(r) => return Err(OracleError::TwoRoots(r, op.id)),
                }
            }
        }
        let root = root.ok_or(OracleError::NoRoot)?;
        for op in ops.values() {
            if !op.is_root() && !ops.contains_key(&op.parent) {
                return Err(OracleError::NotCausallyClosed {
                    missing: op.parent,
                    needed_by: op.id,
                });
            }
        }
        Ok(OpSet { ops, root })
    }

    /// The ops behind the first `k` entries of a log. Prefixes of a
    /// consistent log are causally closed, which `from_ops` re-verifies.
    pub fn from_log_prefix(log: &ReplicaLog, k: u32) -> Result<Self, OpSetFromLogError> {
        if k > log.len() {
            return Err(PrefixOutOfRange { k, len: log.len() }.into());
        }
        Ok(Self::from_ops(log.entries()[..k as usize].iter().copied())?)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.ops.contains_key(&t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Op> {
        self.ops.values()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpSetFromLogError {
    #[error(transparent)]
    Range(#[from] PrefixOutOfRange),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Weave order by definition: depth-first from the root, visiting each
/// op's children in descending timestamp order.
pub fn weave(set: &OpSet) -> Vec<Timestamp> {
    let mut children: BTreeMap<Timestamp, Vec<Timestamp>> = BTreeMap::new();
    for op in set.iter() {
        if !op.is_root() {
            children.entry(op.parent).or_default().push(op.id);
        }
    }
    for list in children.values_mut() {
        list.sort();
    }

    let mut out = Vec::with_capacity(set.len());
    let mut stack = vec![set.root];
    while let Some(t) = stack.pop() {
        out.push(t);
        if let Some(kids) = children.get(&t) {
            // Ascending push makes the greatest child pop first.
            stack.extend(kids.iter().copied());
        }
    }
    out
}

/// The text a converged replica must render: weave order, keeping only
/// chars that no tombstone in the set targets.
pub fn text(set: &OpSet) -> String {
    let mut killed: BTreeSet<Timestamp> = BTreeSet::new();
    for op in set.iter() {
        if op.val == OpValue::Tombstone {
            killed.insert(op.parent);
        }
    }
    let mut out = String::new();
    for t in weave(set) {
        if killed.contains(&t) {
            continue;
        }
        if let OpValue::Char(c) = set.ops[&t].val {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::author::Author;
    use crate::testutil::pinsk_ops;

    fn ts(andx: u32, a: &str) -> Timestamp {
        Timestamp::new(andx, Author::new(a).unwrap())
    }

    fn op(andx: u32, a: &str, pandx: u32, pa: &str, val: OpValue) -> Op {
        Op::new(ts(andx, a), ts(pandx, pa), val).unwrap()
    }

    #[test]
    fn root_only_set() {
        let set = OpSet::from_ops([Op::root(Author::new("alpha").unwrap())]).unwrap();
        assert_eq!(weave(&set), vec![ts(1, "alpha")]);
        assert_eq!(text(&set), "");
    }

    #[test]
    fn closure_is_checked() {
        let err = OpSet::from_ops([
            Op::root(Author::new("alpha").unwrap()),
            op(3, "beta", 2, "beta", OpValue::Char('I')),
        ])
        .unwrap_err();
        assert_eq!(
            err,
            OracleError::NotCausallyClosed { missing: ts(2, "beta"), needed_by: ts(3, "beta") }
        );
        assert_eq!(OpSet::from_ops([]).unwrap_err(), OracleError::NoRoot);
    }

    #[test]
    fn concurrent_children_order_descending() {
        let set = OpSet::from_ops([
            Op::root(Author::new("alpha").unwrap()),
            op(2, "beta", 1, "alpha", OpValue::Char('b')),
            op(2, "gamma", 1, "alpha", OpValue::Char('g')),
        ])
        .unwrap();
        assert_eq!(weave(&set), vec![ts(1, "alpha"), ts(2, "gamma"), ts(2, "beta")]);
        assert_eq!(text(&set), "gb");
    }

    #[test]
    fn full_fixture_weave_and_text() {
        let set = OpSet::from_ops(pinsk_ops()).unwrap();
        let order: Vec<Timestamp> = vec![
            ts(1, "alpha"),
            ts(2, "beta"),
            ts(3, "gamma"),
            ts(5, "gamma"),
            ts(3, "beta"),
            ts(5, "alpha"),
            ts(7, "gamma"),
            ts(8, "beta"),
        ];
        assert_eq!(weave(&set), order);
        assert_eq!(text(&set), "PINSK");
    }

    #[test]
    fn fixture_without_last_op() {
        let ops = pinsk_ops();
        let set = OpSet::from_ops(ops[..7].iter().copied()).unwrap();
        assert_eq!(text(&set), "PINS");
    }

    #[test]
    fn tombstone_suppresses_char() {
        let set = OpSet::from_ops([
            Op::root(Author::new("a").unwrap()),
            op(2, "a", 1, "a", OpValue::Char('x')),
            op(3, "b", 2, "a", OpValue::Tombstone),
        ])
        .unwrap();
        assert_eq!(text(&set), "");
        // Two tombstones on one char are legal and idempotent.
        let set = OpSet::from_ops([
            Op::root(Author::new("a").unwrap()),
            op(2, "a", 1, "a", OpValue::Char('x')),
            op(3, "b", 2, "a", OpValue::Tombstone),
            op(3, "c", 2, "a", OpValue::Tombstone),
        ])
        .unwrap();
        assert_eq!(text(&set), "");
    }
}
