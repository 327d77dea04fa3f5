//! Fixtures shared by the integration suites, built through the public API.

#![allow(dead_code)]

use chronofold::{Author, Doc, Op, OpValue, Timestamp};

pub fn author(s: &str) -> Author {
    Author::new(s).unwrap()
}

pub fn ts(andx: u32, a: &str) -> Timestamp {
    Timestamp::new(andx, author(a))
}

pub fn op(andx: u32, a: &str, pandx: u32, pa: &str, val: OpValue) -> Op {
    Op::new(ts(andx, a), ts(pandx, pa), val).unwrap()
}

/// Three-author "MINSK -> PINSK" history: beta types MI, gamma tombstones
/// the M and puts P in its place, alpha appends N, gamma S, beta K. The op
/// `<8,beta>` (K) never reaches gamma.
pub fn pinsk_ops() -> Vec<Op> {
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

/// Reception order of the fixture ops at each replica, as positions into
/// `pinsk_ops()`. alpha and beta see all eight; gamma misses K.
pub fn pinsk_reception(a: &str) -> Vec<usize> {
    match a {
        "alpha" => vec![0, 1, 3, 2, 5, 4, 6, 7],
        "beta" => vec![0, 1, 2, 3, 4, 5, 6, 7],
        "gamma" => vec![0, 1, 3, 2, 4, 5, 6],
        _ => panic!("no fixture reception order for {a}"),
    }
}

/// The fixture document for one replica, merged in its reception order.
pub fn pinsk_doc(name: &str) -> Doc {
    let ops = pinsk_ops();
    let mut doc = Doc::join(author(name));
    for k in pinsk_reception(name) {
        doc.merge_op(ops[k]).unwrap();
    }
    doc
}
