//! Timing probes for the two claims the structure is built around: local
//! edits append in flat time no matter how large the document grows, and
//! merging a remote batch never relocates existing entries.
//!
//! These are measurements, not assertions; the append-only checks inside
//! each probe are the only hard failures. Callers compare [`BenchResult`]
//! values across sizes to judge scaling.

use std::fmt;
use std::time::Instant;

use crate::author::Author;
use crate::doc::Doc;
use crate::timestamp::LogIndex;

/// One probe outcome: `n` timed operations at `ns_per_op` average, with the
/// entry count of the document the probe left behind.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub name: &'static str,
    pub n: u32,
    pub ns_per_op: f64,
    pub entries: u32,
}

impl fmt::Display for BenchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={} ns_per_op={:.1} entries={}",
            self.name, self.n, self.ns_per_op, self.entries
        )
    }
}

fn bench_author() -> Author {
    Author::new("bench").unwrap()
}

/// Index of the entry an insert just appended.
fn appended(doc: &Doc) -> LogIndex {
    LogIndex::new(doc.len()).unwrap()
}

/// Sequential typing at the end of the document, caret chained through a
/// retained log index so no position translation happens in the loop.
pub fn typing_at_end(n: u32) -> BenchResult {
    let mut doc = Doc::new(bench_author());
    let mut anchor = appended(&doc);
    let started = Instant::now();
    for k in 0..n {
        let before = doc.len();
        doc.local_insert(anchor, char::from(b'a' + (k % 26) as u8)).unwrap();
        assert_eq!(doc.len(), before + 1, "insert must append exactly one entry");
        anchor = appended(&doc);
    }
    let elapsed = started.elapsed();
    let probe = LogIndex::new(1 + n / 2).unwrap();
    let id = doc.inverse_ndx(probe).unwrap();
    assert_eq!(doc.log().ndx(id), Some(probe), "entries must not relocate");
    BenchResult {
        name: "typing_at_end",
        n,
        ns_per_op: elapsed.as_nanos() as f64 / f64::from(n.max(1)),
        entries: doc.len(),
    }
}

/// Typing in the middle of a pre-grown document: half the budget builds the
/// surrounding text, the timed half extends a caret parked at its midpoint.
pub fn mid_document(n: u32) -> BenchResult {
    let mut doc = Doc::new(bench_author());
    let mut tail = appended(&doc);
    let grow = n / 2;
    for _ in 0..grow {
        doc.local_insert(tail, 'x').unwrap();
        tail = appended(&doc);
    }
    let mut caret = LogIndex::new(1 + grow / 2).unwrap();
    let timed = n - grow;
    let started = Instant::now();
    for k in 0..timed {
        let before = doc.len();
        doc.local_insert(caret, char::from(b'a' + (k % 26) as u8)).unwrap();
        assert_eq!(doc.len(), before + 1, "insert must append exactly one entry");
        caret = appended(&doc);
    }
    let elapsed = started.elapsed();
    assert_eq!(doc.inverse_ndx(tail).map(|t| doc.log().ndx(t)), Ok(Some(tail)));
    BenchResult {
        name: "mid_document",
        n: timed,
        ns_per_op: elapsed.as_nanos() as f64 / f64::from(timed.max(1)),
        entries: doc.len(),
    }
}

/// Merge of one n-op remote batch into a freshly joined replica.
pub fn merge_batch(n: u32) -> BenchResult {
    let mut source = Doc::new(bench_author());
    let mut anchor = appended(&source);
    for k in 0..n {
        source.local_insert(anchor, char::from(b'a' + (k % 26) as u8)).unwrap();
        anchor = appended(&source);
    }
    let batch = source.ops_since(0).unwrap();
    let mut sink = Doc::join(Author::new("sink").unwrap());
    let started = Instant::now();
    let applied = sink.apply_batch(&batch).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(applied as u32, n + 1, "every batch op must merge");
    assert_eq!(sink.render_text(), source.render_text());
    BenchResult {
        name: "merge_batch",
        n,
        ns_per_op: elapsed.as_nanos() as f64 / f64::from(n.max(1)),
        entries: sink.len(),
    }
}

/// All probes at one size, in report order.
pub fn run_all(n: u32) -> Vec<BenchResult> {
    vec![typing_at_end(n), mid_document(n), merge_batch(n)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typing_probe_counts_are_exact() {
        let r = typing_at_end(200);
        assert_eq!(r.n, 200);
        assert_eq!(r.entries, 201);
        assert!(r.ns_per_op > 0.0);
        assert_eq!(r.to_string().split(' ').count(), 4);
    }

    #[test]
    fn mid_document_probe_spends_its_whole_budget() {
        let r = mid_document(200);
        assert_eq!(r.n, 100);
        assert_eq!(r.entries, 201);
    }

    #[test]
    fn merge_probe_replicates_fully() {
        let r = merge_batch(150);
        assert_eq!(r.entries, 151);
        assert_eq!(r.name, "merge_batch");
    }

    #[test]
    fn run_all_reports_three_probes() {
        let names: Vec<_> = run_all(64).into_iter().map(|r| r.name).collect();
        assert_eq!(names, vec!["typing_at_end", "mid_document", "merge_batch"]);
    }
}
