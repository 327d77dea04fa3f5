//! Shared fixtures for unit tests.

use crate::author::Author;
use crate::op::{Op, OpValue};
use crate::timestamp::Timestamp;

pub(crate) fn author(s: &str) -> Author {
    Author::new(s).unwrap()
}

pub(crate) fn ts(andx: u32, a: &str) -> Timestamp {
    Timestamp::new(andx, author(a))
}

pub(crate) fn op(andx: u32, a: &str, pandx: u32, pa: &str, val: OpValue) -> Op {
    Op::new(ts(andx, a), ts(pandx, pa), val).unwrap()
}

/// Three-author "MINSK -> PINSK" history used as a fixture across the test
/// suite: beta types MI, gamma tombstones the M and types P in its place,
/// alpha appends N, gamma S, beta K. The op numbered `<8,beta>` (K) never
/// reaches gamma.
///
/// Everyone's converged weave: Root M ~M P I N S K, rendering "PINSK";
/// gamma's seven ops render "PINS".
pub(crate) fn pinsk_ops() -> Vec<Op> {
    vec![
        Op::root(author("alpha")),
        op(2, "beta", 1, "alpha", OpValue::Char('M')),
        op(3, "beta", 2, "beta", OpValue::Char('I')),
        op(3, "gamma", 2, "beta", OpValue::Tombstone),
        op(5, "gamma", 3, "gamma", OpValue::Char('P')),
        op(5, "alpha", 3, "beta", OpValue::Char('N')),
        op(7, "gamma", 5, "alpha", OpValue::Char('S')),
        op(8, "beta", 7, "gamma", OpValue::Char('K')),
    ]
}

/// Reception order of the eight fixture ops at each replica, as positions
/// into `pinsk_ops()`. alpha and beta see all eight; gamma misses K.
pub(crate) fn pinsk_reception(a: &str) -> Vec<usize> {
    match a {
        // <1,a> <2,b> <3,g> <3,b> <5,a> <5,g> <7,g> <8,b>
        "alpha" => vec![0, 1, 3, 2, 5, 4, 6, 7],
        // <1,a> <2,b> <3,b> <3,g> <5,g> <5,a> <7,g> <8,b>
        "beta" => vec![0, 1, 2, 3, 4, 5, 6, 7],
        // <1,a> <2,b> <3,g> <3,b> <5,g> <5,a> <7,g>
        "gamma" => vec![0, 1, 3, 2, 4, 5, 6],
        _ => panic!("no fixture reception order for {a}"),
    }
}
