//! Scenario scripts: a line-oriented command language for driving a fleet
//! of replicas through edits, syncs, and expectations, plus the engine
//! that executes them.
//!
//! One command per line. `#` starts a full-line comment; blank lines are
//! skipped. Text arguments are double-quoted with `\n`, `\t`, `\\`, `\"`
//! escapes. Positions count visible characters and are 0-based.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::author::Author;
use crate::doc::{Doc, EditError};
use crate::op::Op;
use crate::replication::{decode_batch, encode_batch, SyncError};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Command {
    /// Declare a replica. The first declared replica roots the document.
    Replica { name: Author },
    Insert { replica: Author, pos: usize, text: String },
    Delete { replica: Author, pos: usize, len: usize },
    /// One-way postfix exchange from `from` to `to`.
    Sync { from: Author, to: Author },
    Expect { replica: Author, text: String },
    Rebase { replica: Author },
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Replica { name } => write!(f, "replica {name}"),
            Command::Insert { replica, pos, text } => {
                write!(f, "insert {replica} {pos} \"{}\"", escape(text))
            }
            Command::Delete { replica, pos, len } => write!(f, "delete {replica} {pos} {len}"),
            Command::Sync { from, to } => write!(f, "sync {from} {to}"),
            Command::Expect { replica, text } => {
                write!(f, "expect {replica} \"{}\"", escape(text))
            }
            Command::Rebase { replica } => write!(f, "rebase {replica}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Spanned<T> {
    pub line: usize,
    pub value: T,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Scenario {
    pub commands: Vec<Spanned<Command>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, col {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Scenario {
    pub fn parse(src: &str) -> Result<Scenario, ParseError> {
        let mut commands = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            if let Some(cmd) = parse_line(i + 1, raw)? {
                commands.push(Spanned { line: i + 1, value: cmd });
            }
        }
        Ok(Scenario { commands })
    }

    /// Canonical text form: one command per line, comments and blank lines
    /// dropped, strings re-escaped. Parsing the result reproduces the same
    /// command list, and rendering is a fixpoint.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for cmd in &self.commands {
            out.push_str(&cmd.value.to_string());
            out.push('\n');
        }
        out
    }
}

struct Cursor {
    line: usize,
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(line: usize, src: &str) -> Self {
        Cursor { line, chars: src.chars().collect(), pos: 0 }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| !c.is_whitespace()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(format!("expected {what}")));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn author(&mut self, what: &str) -> Result<Author, ParseError> {
        self.skip_ws();
        let col = self.pos + 1;
        let word = self.word(what)?;
        Author::new(&word).map_err(|e| ParseError {
            line: self.line,
            col,
            message: format!("bad {what}: {e}"),
        })
    }

    fn number(&mut self, what: &str) -> Result<usize, ParseError> {
        self.skip_ws();
        let col = self.pos + 1;
        let word = self.word(what)?;
        if word.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(n) = word.parse() {
                return Ok(n);
            }
        }
        Err(ParseError {
            line: self.line,
            col,
            message: format!("expected a number for {what}, got {word:?}"),
        })
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        if self.chars.get(self.pos) != Some(&'"') {
            return Err(self.err("expected a double-quoted string"));
        }
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.chars.get(self.pos) {
                None => return Err(self.err("unterminated string")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.chars.get(self.pos) {
                        Some('n') => out.push('\n'),
                        Some('t') => out.push('\t'),
                        Some('\\') => out.push('\\'),
                        Some('"') => out.push('"'),
                        Some(c) => return Err(self.err(format!("unknown escape \\{c}"))),
                        None => return Err(self.err("unterminated string")),
                    }
                    self.pos += 1;
                }
                Some(&c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.at_end() {
            Ok(())
        } else {
            let rest: String = self.chars[self.pos..].iter().collect();
            Err(self.err(format!("unexpected trailing input {rest:?}")))
        }
    }
}

fn parse_line(line_no: usize, raw: &str) -> Result<Option<Command>, ParseError> {
    let mut cur = Cursor::new(line_no, raw);
    cur.skip_ws();
    if cur.at_end() || cur.chars.get(cur.pos) == Some(&'#') {
        return Ok(None);
    }
    let keyword = cur.word("a command")?;
    let cmd = match keyword.as_str() {
        "replica" => Command::Replica { name: cur.author("replica name")? },
        "insert" => Command::Insert {
            replica: cur.author("replica name")?,
            pos: cur.number("position")?,
            text: cur.quoted()?,
        },
        "delete" => Command::Delete {
            replica: cur.author("replica name")?,
            pos: cur.number("position")?,
            len: cur.number("length")?,
        },
        "sync" => Command::Sync {
            from: cur.author("source replica")?,
            to: cur.author("target replica")?,
        },
        "expect" => Command::Expect {
            replica: cur.author("replica name")?,
            text: cur.quoted()?,
        },
        "rebase" => Command::Rebase { replica: cur.author("replica name")? },
        other => {
            return Err(ParseError {
                line: line_no,
                col: 1,
                message: format!("unknown command {other:?}"),
            })
        }
    };
    cur.finish()?;
    Ok(Some(cmd))
}

// ── execution ───────────────────────────────────────────────────────────

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("replica {0} is not declared")]
    UnknownReplica(Author),
    #[error("replica {0} is already declared")]
    DuplicateReplica(Author),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Sync(#[from] SyncError),
}

/// A fleet of replicas addressed by author name. The first replica added
/// roots the shared document; the rest join empty and learn the root over
/// sync like any other op.
#[derive(Default)]
pub struct Engine {
    docs: BTreeMap<Author, Doc>,
    order: Vec<Author>,
}

impl Engine {
    pub fn new() -> Self {
        Engine::default()
    }

    pub fn add_replica(&mut self, name: Author) -> Result<(), EngineError> {
        if self.docs.contains_key(&name) {
            return Err(EngineError::DuplicateReplica(name));
        }
        let doc = if self.docs.is_empty() { Doc::new(name) } else { Doc::join(name) };
        self.docs.insert(name, doc);
        self.order.push(name);
        Ok(())
    }

    pub fn doc(&self, name: Author) -> Option<&Doc> {
        self.docs.get(&name)
    }

    pub fn doc_mut(&mut self, name: Author) -> Option<&mut Doc> {
        self.docs.get_mut(&name)
    }

    /// Replicas in declaration order.
    pub fn replicas(&self) -> &[Author] {
        &self.order
    }

    fn get(&self, name: Author) -> Result<&Doc, EngineError> {
        self.docs.get(&name).ok_or(EngineError::UnknownReplica(name))
    }

    fn get_mut(&mut self, name: Author) -> Result<&mut Doc, EngineError> {
        self.docs.get_mut(&name).ok_or(EngineError::UnknownReplica(name))
    }

    pub fn insert(&mut self, name: Author, pos: usize, text: &str) -> Result<Vec<Op>, EngineError> {
        Ok(self.get_mut(name)?.insert_text(pos, text)?)
    }

    pub fn delete(&mut self, name: Author, pos: usize, len: usize) -> Result<Vec<Op>, EngineError> {
        Ok(self.get_mut(name)?.delete_text(pos, len)?)
    }

    /// One-way postfix sync, routed through the wire encoding. Returns the
    /// number of ops merged at `to`.
    pub fn sync(&mut self, from: Author, to: Author) -> Result<usize, EngineError> {
        let known = self.get(to)?.peer_known_length(from);
        let sender = self.get(from)?;
        let batch = sender.ops_since(known).map_err(SyncError::from)?;
        let wire = encode_batch(&batch);
        let batch = decode_batch(&wire).map_err(SyncError::from)?;
        let merged = self.get_mut(to)?.apply_batch(&batch).map_err(SyncError::from)?;
        Ok(merged)
    }

    pub fn rebase(&mut self, name: Author) -> Result<u32, EngineError> {
        let doc = self.get_mut(name)?;
        *doc = doc.rebase();
        Ok(doc.len())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepOutcome {
    Declared,
    Edited { ops: usize },
    Synced { merged: usize },
    ExpectOk,
    ExpectFailed { want: String, got: String },
    Rebased { entries: u32 },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Step {
    pub line: usize,
    pub command: Command,
    pub outcome: StepOutcome,
}

/// Final state of one replica after a run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReplicaFinal {
    pub author: Author,
    pub text: String,
    pub log_len: u32,
    /// Log indices in weave order.
    pub weave: Vec<u32>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Transcript {
    pub steps: Vec<Step>,
    pub finals: Vec<ReplicaFinal>,
    pub failed: bool,
}

impl Transcript {
    /// Stable text form: one line per step, then one per replica.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let status = match &step.outcome {
                StepOutcome::Declared => "ok".to_string(),
                StepOutcome::Edited { ops } => format!("ok ({ops} ops)"),
                StepOutcome::Synced { merged } => format!("ok ({merged} merged)"),
                StepOutcome::ExpectOk => "ok".to_string(),
                StepOutcome::ExpectFailed { want, got } => {
                    format!("FAIL (expected {:?}, got {:?})", want, got)
                }
                StepOutcome::Rebased { entries } => format!("ok ({entries} entries)"),
            };
            out.push_str(&format!("{:>4}  {}  ... {}\n", step.line, step.command, status));
        }
        for fin in &self.finals {
            let weave: Vec<String> = fin.weave.iter().map(u32::to_string).collect();
            out.push_str(&format!(
                "final {}: text={:?} log_len={} weave=[{}]\n",
                fin.author,
                fin.text,
                fin.log_len,
                weave.join(" ")
            ));
        }
        out.push_str(if self.failed { "result: FAIL\n" } else { "result: PASS\n" });
        out
    }
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {source}")]
    Step {
        line: usize,
        #[source]
        source: EngineError,
    },
}

/// Execute a scenario. Expectation mismatches mark the transcript failed
/// and execution continues; anything else that goes wrong (unknown
/// replica, bad position, sync rejection) aborts with the offending line.
pub fn run_scenario(scenario: &Scenario) -> Result<Transcript, ScriptError> {
    execute_scenario(scenario).map(|(t, _)| t)
}

/// Like [`run_scenario`], but hands back the engine too, so callers can
/// inspect the final replica states directly.
pub fn execute_scenario(scenario: &Scenario) -> Result<(Transcript, Engine), ScriptError> {
    let mut engine = Engine::new();
    let mut transcript = Transcript::default();
    for Spanned { line, value: command } in &scenario.commands {
        let line = *line;
        let at = |source| ScriptError::Step { line, source };
        let outcome = match command {
            Command::Replica { name } => {
                engine.add_replica(*name).map_err(at)?;
                StepOutcome::Declared
            }
            Command::Insert { replica, pos, text } => {
                let ops = engine.insert(*replica, *pos, text).map_err(at)?;
                StepOutcome::Edited { ops: ops.len() }
            }
            Command::Delete { replica, pos, len } => {
                let ops = engine.delete(*replica, *pos, *len).map_err(at)?;
                StepOutcome::Edited { ops: ops.len() }
            }
            Command::Sync { from, to } => {
                let merged = engine.sync(*from, *to).map_err(at)?;
                StepOutcome::Synced { merged }
            }
            Command::Expect { replica, text } => {
                let doc = engine
                    .doc(*replica)
                    .ok_or_else(|| at(EngineError::UnknownReplica(*replica)))?;
                let got = doc.render_text();
                if got == *text {
                    StepOutcome::ExpectOk
                } else {
                    transcript.failed = true;
                    StepOutcome::ExpectFailed { want: text.clone(), got }
                }
            }
            Command::Rebase { replica } => {
                let entries = engine.rebase(*replica).map_err(at)?;
                StepOutcome::Rebased { entries }
            }
        };
        transcript.steps.push(Step { line, command: command.clone(), outcome });
    }
    for &author in engine.replicas() {
        let doc = engine.doc(author).unwrap();
        transcript.finals.push(ReplicaFinal {
            author,
            text: doc.render_text(),
            log_len: doc.len(),
            weave: doc.weave().map(|j| j.get()).collect(),
        });
    }
    Ok((transcript, engine))
}

/// Parse and execute in one step.
pub fn run_script(src: &str) -> Result<Transcript, ScriptError> {
    run_scenario(&Scenario::parse(src)?)
}
