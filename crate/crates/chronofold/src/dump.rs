//! Stable plain-text views of a replica, and a loader that rebuilds a
//! document from its own full dump.
//!
//! Structured dumps open with a `CFLD1 <author> <length>` header. The
//! chronofold body lists one entry per line as `<ndx> <val> <next>`, with
//! values in the wire encoding and `0` marking the weave end. Co-structure
//! sections follow as a `<NAME> <count>` line over `<key> <value>` rows:
//! `AUTHORS` and `SHIFTS` give span starts, `REFS` the causal references
//! that differ from the previous log entry, `TOC` the live newlines in
//! weave order. Text dumps are the bare rendered text. Output is
//! deterministic, so two dumps diff cleanly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::author::Author;
use crate::doc::{Doc, MergeError};
use crate::op::{Op, OpError, OpValue};
use crate::replication::{encode_op, encode_val, parse_value};
use crate::timestamp::{LogIndex, Timestamp};

/// Dump selector: which view of the document to render.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum What {
    /// Rendered text only.
    Text,
    /// The subjective log, one op per line in the wire encoding.
    Log,
    /// Entries in weave order with their payloads.
    Weave,
    /// The full loadable dump: entries plus every co-structure section.
    Chronofold,
    /// Co-structure sections only.
    Costructures,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown dump selector {0:?} (want text|log|weave|chronofold|costructures)")]
pub struct WhatParseError(String);

impl FromStr for What {
    type Err = WhatParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(What::Text),
            "log" => Ok(What::Log),
            "weave" => Ok(What::Weave),
            "chronofold" => Ok(What::Chronofold),
            "costructures" => Ok(What::Costructures),
            other => Err(WhatParseError(other.to_string())),
        }
    }
}

impl fmt::Display for What {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            What::Text => "text",
            What::Log => "log",
            What::Weave => "weave",
            What::Chronofold => "chronofold",
            What::Costructures => "costructures",
        };
        f.write_str(name)
    }
}

pub fn dump(doc: &Doc, what: What) -> String {
    match what {
        What::Text => {
            let mut out = doc.render_text();
            out.push('\n');
            out
        }
        What::Log => {
            let mut out = header(doc);
            for (k, op) in doc.log().entries().iter().enumerate() {
                out.push_str(&format!("{} {}\n", k + 1, encode_op(op)));
            }
            out
        }
        What::Weave => {
            let mut out = header(doc);
            for j in doc.weave() {
                let entry = doc.fold().get(j).expect("weave yields valid indices");
                out.push_str(&format!("{} {}\n", j.get(), encode_val(entry.val)));
            }
            out
        }
        What::Chronofold => {
            let mut out = header(doc);
            push_entries(doc, &mut out);
            push_sections(doc, &mut out);
            out
        }
        What::Costructures => {
            let mut out = header(doc);
            push_sections(doc, &mut out);
            out
        }
    }
}

fn header(doc: &Doc) -> String {
    format!("CFLD1 {} {}\n", doc.author(), doc.len())
}

fn push_entries(doc: &Doc, out: &mut String) {
    for (k, entry) in doc.fold().entries().iter().enumerate() {
        let next = entry.next.map_or(0, LogIndex::get);
        out.push_str(&format!("{} {} {}\n", k + 1, encode_val(entry.val), next));
    }
}

fn push_sections(doc: &Doc, out: &mut String) {
    let cs = doc.costructures();
    section(out, "AUTHORS", cs.author_spans().map(|(s, a)| format!("{s} {a}")));
    section(out, "SHIFTS", cs.shift_spans().map(|(s, v)| format!("{s} {v}")));
    section(out, "REFS", cs.ref_entries().map(|(j, p)| format!("{j} {p}")));
    let newlines = doc.weave().filter(|&j| {
        doc.fold().get(j).is_some_and(|e| e.val == OpValue::Char('\n')) && cs.is_live(j)
    });
    section(out, "TOC", newlines.enumerate().map(|(k, j)| format!("{} {}", k + 1, j.get())));
}

fn section(out: &mut String, name: &str, rows: impl Iterator<Item = String>) {
    let rows: Vec<String> = rows.collect();
    out.push_str(&format!("{} {}\n", name, rows.len()));
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("entry {ndx}: {source}")]
    BadOp {
        ndx: u32,
        #[source]
        source: OpError,
    },
    #[error("entry {ndx} failed to merge: {source}")]
    Rebuild {
        ndx: u32,
        #[source]
        source: MergeError,
    },
    #[error("entry {ndx}: stored weave link disagrees with the rebuilt weave")]
    WeaveMismatch { ndx: u32 },
}

/// Rebuild a document from a full chronofold dump.
///
/// The entry payloads plus the `AUTHORS`, `SHIFTS`, and `REFS` sections pin
/// down every op, so the log is replayed through the normal merge path; the
/// dumped `next` column is then checked against the links the replay
/// produced, which catches dumps whose redundant parts disagree.
pub fn load(src: &str) -> Result<Doc, LoadError> {
    let malformed = |line: usize, reason: String| LoadError::Malformed { line, reason };
    let mut lines = src.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (line, head) = lines.next().ok_or_else(|| malformed(1, "empty input".into()))?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    let [magic, author, lh] = fields[..] else {
        return Err(malformed(line, "header wants `CFLD1 <author> <length>`".into()));
    };
    if magic != "CFLD1" {
        return Err(malformed(line, format!("bad magic {magic:?}")));
    }
    let author = Author::new(author).map_err(|e| malformed(line, format!("bad author: {e}")))?;
    let lh = parse_num(line, lh, "length")?;

    let mut vals = Vec::with_capacity(lh as usize);
    let mut nexts = Vec::with_capacity(lh as usize);
    for want in 1..=lh {
        let (line, body) = lines
            .next()
            .ok_or_else(|| malformed(want as usize + 1, format!("missing entry {want}")))?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [ndx, val, next] = fields[..] else {
            return Err(malformed(line, "entry wants `<ndx> <val> <next>`".into()));
        };
        if parse_num(line, ndx, "entry index")? != want {
            return Err(malformed(line, format!("expected entry {want}, found {ndx}")));
        }
        let val = parse_value(line, val).map_err(|e| malformed(line, e.to_string()))?;
        let next = parse_num(line, next, "next link")?;
        if next > lh {
            return Err(malformed(line, format!("next link {next} beyond length {lh}")));
        }
        vals.push(val);
        nexts.push(next);
    }

    let authors = read_section(&mut lines, "AUTHORS", lh, |line, token| {
        Author::new(token)
            .map_err(|e| LoadError::Malformed { line, reason: format!("bad author: {e}") })
    })?;
    let shifts =
        read_section(&mut lines, "SHIFTS", lh, |line, token| parse_num(line, token, "shift"))?;
    let refs =
        read_section(&mut lines, "REFS", lh, |line, token| parse_num(line, token, "reference"))?;
    read_section(&mut lines, "TOC", lh, |line, token| parse_num(line, token, "toc entry"))?;
    if let Some((line, extra)) = lines.next() {
        return Err(malformed(line, format!("trailing content {extra:?}")));
    }

    let first_author = authors.keys().next().copied();
    let first_shift = shifts.keys().next().copied();
    for (name, first) in [("AUTHORS", first_author), ("SHIFTS", first_shift)] {
        if lh > 0 && first != Some(1) {
            return Err(malformed(1, format!("{name} must start a span at entry 1")));
        }
    }
    // A self-reference marks a root; anything later than its own entry
    // cannot be a causal parent.
    for (&j, &p) in &refs {
        if p > j {
            return Err(malformed(1, format!("entry {j} references {p}, which is later")));
        }
    }

    fn span_at<T: Copy>(spans: &BTreeMap<u32, T>, ndx: u32) -> T {
        *spans.range(..=ndx).next_back().expect("span coverage checked").1
    }
    let mut ids: Vec<Timestamp> = Vec::with_capacity(lh as usize);
    let mut doc = Doc::join(author);
    for ndx in 1..=lh {
        let who: Author = span_at(&authors, ndx);
        let shift: u32 = span_at(&shifts, ndx);
        if shift >= ndx {
            return Err(malformed(1, format!("entry {ndx} carries shift {shift}")));
        }
        let id = Timestamp::new(ndx - shift, who);
        let parent_ndx = refs.get(&ndx).copied().unwrap_or(ndx - 1);
        let parent =
            if parent_ndx == 0 || parent_ndx == ndx { id } else { ids[parent_ndx as usize - 1] };
        let op = Op::new(id, parent, vals[ndx as usize - 1])
            .map_err(|source| LoadError::BadOp { ndx, source })?;
        doc.merge_op(op).map_err(|source| LoadError::Rebuild { ndx, source })?;
        ids.push(id);
    }

    for ndx in 1..=lh {
        let j = LogIndex::new(ndx).unwrap();
        let rebuilt = doc.fold().get(j).expect("replayed entry").next.map_or(0, LogIndex::get);
        if rebuilt != nexts[ndx as usize - 1] {
            return Err(LoadError::WeaveMismatch { ndx });
        }
    }
    Ok(doc)
}

fn parse_num(line: usize, token: &str, name: &str) -> Result<u32, LoadError> {
    let ok = !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit());
    ok.then(|| token.parse::<u32>().ok())
        .flatten()
        .ok_or_else(|| LoadError::Malformed { line, reason: format!("bad {name} {token:?}") })
}

/// Parse one `<NAME> <count>` section into key-sorted rows. Keys must rise
/// strictly and stay within the document.
fn read_section<'a, T>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    name: &str,
    lh: u32,
    mut value: impl FnMut(usize, &str) -> Result<T, LoadError>,
) -> Result<BTreeMap<u32, T>, LoadError> {
    let malformed = |line: usize, reason: String| LoadError::Malformed { line, reason };
    let (line, head) =
        lines.next().ok_or_else(|| malformed(0, format!("missing section {name}")))?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    let [got, count] = fields[..] else {
        return Err(malformed(line, format!("section header wants `{name} <count>`")));
    };
    if got != name {
        return Err(malformed(line, format!("expected section {name}, found {got:?}")));
    }
    let count = parse_num(line, count, "section count")?;
    let mut rows = BTreeMap::new();
    let mut last = 0;
    for _ in 0..count {
        let (line, body) =
            lines.next().ok_or_else(|| malformed(0, format!("section {name} cut short")))?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [key, val] = fields[..] else {
            return Err(malformed(line, "section row wants `<key> <value>`".into()));
        };
        let key = parse_num(line, key, "section key")?;
        if key <= last || key > lh {
            return Err(malformed(line, format!("section key {key} out of order or range")));
        }
        last = key;
        rows.insert(key, value(line, val)?);
    }
    Ok(rows)
}
