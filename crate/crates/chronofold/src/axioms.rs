//! Definition-level checkers for the laws that make a family of replica
//! logs a consistent causal tree:
//!
//! 1. every timestamp `<n,a>` in use satisfies `n <= len(a's log)`, and
//!    a's log holds exactly `<n,a>` at position n;
//! 2. the parent of `<n,a>` appears among the first n entries of a's log;
//! 3. if position i of one log holds `<m,b>`, the first m entries of b's
//!    log all appear among that log's first i entries.
//!
//! These run in test-oracle time, not edit time: the editing structures are
//! trusted to preserve the laws by construction and audited with these.

use std::collections::HashMap;

use thiserror::Error;

use crate::author::Author;
use crate::log::ReplicaLog;
use crate::op::Op;
use crate::timestamp::Timestamp;

/// One detected violation. `axiom` is 1, 2 or 3; `author` and `index` locate
/// the offending entry in that author's log (for axiom 1, the position the
/// timestamp claims). Violations are data for tests to assert on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: u8,
    pub author: Author,
    pub index: u32,
    pub description: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("timestamp {0} does not appear in any provided log")]
pub struct UnknownTimestamp(pub Timestamp);

fn position_map(log: &ReplicaLog) -> HashMap<Timestamp, u32> {
    let mut map = HashMap::with_capacity(log.len() as usize);
    for (slot, op) in log.entries().iter().enumerate() {
        map.entry(op.id).or_insert(slot as u32 + 1);
    }
    map
}

/// Check all three axioms over a family of logs and return every violation
/// found. An empty result means the family is consistent.
pub fn check_axioms(logs: &[&ReplicaLog]) -> Vec<AxiomViolation> {
    let mut violations = Vec::new();

    let mut by_author: HashMap<Author, &ReplicaLog> = HashMap::new();
    for log in logs {
        by_author.entry(log.author()).or_insert(log);
    }
    let positions: HashMap<Author, HashMap<Timestamp, u32>> =
        by_author.iter().map(|(a, log)| (*a, position_map(log))).collect();

    // Injectivity and a single definition per id underpin all three axioms.
    let mut catalog: HashMap<Timestamp, Op> = HashMap::new();
    for log in by_author.values() {
        let mut seen: HashMap<Timestamp, u32> = HashMap::new();
        for (slot, op) in log.entries().iter().enumerate() {
            let i = slot as u32 + 1;
            if let Some(first) = seen.insert(op.id, i) {
                violations.push(AxiomViolation {
                    axiom: 1,
                    author: log.author(),
                    index: i,
                    description: format!("{} duplicates entry {first}", op.id),
                });
            }
            match catalog.insert(op.id, *op) {
                Some(prev) if prev != *op => violations.push(AxiomViolation {
                    axiom: 1,
                    author: log.author(),
                    index: i,
                    description: format!("{} is defined differently in another log", op.id),
                }),
                _ => {}
            }
        }
    }

    let mut ids: Vec<Timestamp> = catalog.keys().copied().collect();
    ids.sort();

    for &t in &ids {
        // Axiom 1: the author's log vouches for the timestamp at position andx.
        let Some(home) = by_author.get(&t.author) else {
            violations.push(AxiomViolation {
                axiom: 1,
                author: t.author,
                index: t.andx,
                description: format!("{t} is in use but no log for {} was given", t.author),
            });
            continue;
        };
        let at = crate::timestamp::LogIndex::new(t.andx).and_then(|j| home.get(j));
        match at {
            Some(op) if op.id == t => {}
            Some(op) => violations.push(AxiomViolation {
                axiom: 1,
                author: t.author,
                index: t.andx,
                description: format!("position {} of {}'s log holds {}, not {t}", t.andx, t.author, op.id),
            }),
            None => violations.push(AxiomViolation {
                axiom: 1,
                author: t.author,
                index: t.andx,
                description: format!("{t} exceeds {}'s log length {}", t.author, home.len()),
            }),
        }

        // Axiom 2: the parent was known to the author by the time it numbered t.
        let op = catalog[&t];
        if !op.is_root() {
            let parent_pos = positions[&t.author].get(&op.parent).copied();
            match parent_pos {
                Some(p) if p <= t.andx => {}
                _ => violations.push(AxiomViolation {
                    axiom: 2,
                    author: t.author,
                    index: t.andx,
                    description: format!(
                        "parent {} of {t} is not within the first {} entries of {}'s log",
                        op.parent, t.andx, t.author
                    ),
                }),
            }
        }
    }

    // Axiom 3: each received op carries its author's whole log prefix along.
    // Verified prefixes only grow with i, so remember how far each foreign
    // log has been confirmed and extend from there.
    for log in logs {
        let my_pos = &positions[&log.author()];
        let mut confirmed: HashMap<Author, u32> = HashMap::new();
        for (slot, op) in log.entries().iter().enumerate() {
            let i = slot as u32 + 1;
            let t = op.id;
            let Some(home) = by_author.get(&t.author) else { continue };
            if t.andx > home.len() {
                continue; // already reported under axiom 1
            }
            let from = confirmed.get(&t.author).copied().unwrap_or(0);
            let mut ok = true;
            for carried in &home.entries()[from as usize..t.andx as usize] {
                match my_pos.get(&carried.id) {
                    Some(&p) if p <= i => {}
                    _ => {
                        violations.push(AxiomViolation {
                            axiom: 3,
                            author: log.author(),
                            index: i,
                            description: format!(
                                "{t} at position {i} requires {} from {}'s log prefix, \
                                 missing from the first {i} entries",
                                carried.id, t.author
                            ),
                        });
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let best = confirmed.entry(t.author).or_insert(0);
                *best = (*best).max(t.andx);
            }
        }
    }

    violations
}

/// Causal partial order over timestamps: `s` precedes `t` when a chain of
/// steps connects them, each step going from an op either to its parent or
/// to anything inside the author-log prefix its timestamp vouches for.
/// Reflexive by the empty chain. Implemented as literal backward search.
pub fn causally_precedes(
    logs: &[&ReplicaLog],
    s: Timestamp,
    t: Timestamp,
) -> Result<bool, UnknownTimestamp> {
    let mut by_author: HashMap<Author, &ReplicaLog> = HashMap::new();
    for log in logs {
        by_author.entry(log.author()).or_insert(log);
    }
    let mut catalog: HashMap<Timestamp, Op> = HashMap::new();
    for log in logs {
        for op in log.entries() {
            catalog.entry(op.id).or_insert(*op);
        }
    }
    if !catalog.contains_key(&s) {
        return Err(UnknownTimestamp(s));
    }
    if !catalog.contains_key(&t) {
        return Err(UnknownTimestamp(t));
    }

    let mut visited = std::collections::HashSet::new();
    let mut stack = vec![t];
    while let Some(u) = stack.pop() {
        if u == s {
            return Ok(true);
        }
        if !visited.insert(u) {
            continue;
        }
        let op = catalog[&u];
        if !op.is_root() {
            stack.push(op.parent);
        }
        if let Some(home) = by_author.get(&u.author) {
            let upto = (u.andx as usize).min(home.entries().len());
            for carried in &home.entries()[..upto] {
                if !visited.contains(&carried.id) {
                    stack.push(carried.id);
                }
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::OpValue;

    fn author(s: &str) -> Author {
        Author::new(s).unwrap()
    }

    fn ts(andx: u32, a: &str) -> Timestamp {
        Timestamp::new(andx, author(a))
    }

    fn op(andx: u32, a: &str, pandx: u32, pa: &str, val: OpValue) -> Op {
        Op::new(ts(andx, a), ts(pandx, pa), val).unwrap()
    }

    fn log_of(a: &str, ops: &[Op]) -> ReplicaLog {
        let mut log = ReplicaLog::new(author(a));
        for o in ops {
            log.append(*o).unwrap();
        }
        log
    }

    fn two_author_pair() -> (ReplicaLog, ReplicaLog) {
        let root = Op::root(author("alpha"));
        let m = op(2, "beta", 1, "alpha", OpValue::Char('M'));
        let i = op(3, "beta", 2, "beta", OpValue::Char('I'));
        let alpha = log_of("alpha", &[root, m, i]);
        let beta = log_of("beta", &[root, m, i]);
        (alpha, beta)
    }

    #[test]
    fn consistent_pair_has_no_violations() {
        let (alpha, beta) = two_author_pair();
        assert_eq!(check_axioms(&[&alpha, &beta]), Vec::new());
    }

    #[test]
    fn missing_prefix_breaks_axiom_three() {
        let root = Op::root(author("alpha"));
        let m = op(2, "beta", 1, "alpha", OpValue::Char('M'));
        let i = op(3, "beta", 2, "beta", OpValue::Char('I'));
        let alpha = log_of("alpha", &[root]);
        let beta = log_of("beta", &[root, m, i]);
        // gamma received <3,beta> without <2,beta>: its presence vouches for
        // beta's 3-entry prefix, which gamma does not hold.
        let mut gamma = ReplicaLog::new(author("gamma"));
        gamma.append(root).unwrap();
        gamma.push_for_test(i);
        let violations = check_axioms(&[&alpha, &beta, &gamma]);
        assert!(violations.iter().any(|v| v.axiom == 3 && v.author == author("gamma") && v.index == 2),
            "got {violations:?}");
        // The timestamps themselves are all fine, so the breakage is
        // confined to axiom 3.
        assert!(violations.iter().all(|v| v.axiom == 3), "got {violations:?}");
    }

    #[test]
    fn wrong_home_position_breaks_axiom_one() {
        let root = Op::root(author("alpha"));
        let m = op(2, "beta", 1, "alpha", OpValue::Char('M'));
        // beta's own log lacks m at position 2 (it only has the root), while
        // alpha circulates m.
        let alpha = log_of("alpha", &[root, m]);
        let beta = log_of("beta", &[root]);
        let violations = check_axioms(&[&alpha, &beta]);
        assert!(violations.iter().any(|v| v.axiom == 1 && v.author == author("beta") && v.index == 2));
    }

    #[test]
    fn parent_outside_prefix_breaks_axiom_two() {
        let root = Op::root(author("alpha"));
        let a2 = op(2, "alpha", 1, "alpha", OpValue::Char('x'));
        let a3 = op(3, "alpha", 2, "alpha", OpValue::Char('y'));
        // beta claims <2,beta> with parent <3,alpha>: the parent postdates
        // the two-entry prefix the timestamp vouches for. Assembled raw;
        // the Op constructor refuses to build it.
        let bad = Op { id: ts(2, "beta"), parent: ts(3, "alpha"), val: OpValue::Char('z') };
        let alpha = log_of("alpha", &[root, a2, a3]);
        let mut beta = ReplicaLog::new(author("beta"));
        beta.append(root).unwrap();
        beta.push_for_test(bad);
        let violations = check_axioms(&[&alpha, &beta]);
        assert!(violations.iter().any(|v| v.axiom == 2 && v.author == author("beta") && v.index == 2),
            "got {violations:?}");
    }

    #[test]
    fn causal_order_follows_parents_and_prefixes() {
        let (alpha, beta) = two_author_pair();
        let logs = [&alpha, &beta];
        // Parent chain.
        assert_eq!(causally_precedes(&logs, ts(1, "alpha"), ts(3, "beta")), Ok(true));
        // Reflexive.
        assert_eq!(causally_precedes(&logs, ts(2, "beta"), ts(2, "beta")), Ok(true));
        // Never backwards.
        assert_eq!(causally_precedes(&logs, ts(3, "beta"), ts(1, "alpha")), Ok(false));
        // Unknown timestamp is an error, not false.
        assert_eq!(
            causally_precedes(&logs, ts(9, "beta"), ts(1, "alpha")),
            Err(UnknownTimestamp(ts(9, "beta"))),
        );
    }

    #[test]
    fn prefix_step_orders_concurrent_looking_ops() {
        // gamma saw beta's <2,beta> (prefix step), then authored <3,gamma>
        // with the root as parent. The parent chain alone would miss the
        // dependency; the log-prefix step must find it.
        let root = Op::root(author("alpha"));
        let m = op(2, "beta", 1, "alpha", OpValue::Char('M'));
        let g = op(3, "gamma", 1, "alpha", OpValue::Char('G'));
        let alpha = log_of("alpha", &[root, m, g]);
        let beta = log_of("beta", &[root, m]);
        let gamma = log_of("gamma", &[root, m, g]);
        let logs = [&alpha, &beta, &gamma];
        assert_eq!(causally_precedes(&logs, ts(2, "beta"), ts(3, "gamma")), Ok(true));
        assert_eq!(causally_precedes(&logs, ts(3, "gamma"), ts(2, "beta")), Ok(false));
    }
}
