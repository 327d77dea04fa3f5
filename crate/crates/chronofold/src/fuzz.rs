//! Randomized convergence testing: generate a valid multi-replica editing
//! scenario from a seed, run it, sync everyone to quiescence, and hold the
//! result against the full invariant suite. Failures come back as a report
//! carrying a minimized scenario that re-fails on replay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::author::Author;
use crate::axioms::check_axioms;
use crate::diff::apply_splices;
use crate::doc::{Doc, Version};
use crate::log::ReplicaLog;
use crate::oracle::{self, OpSet};
use crate::script::{execute_scenario, Command, Engine, Scenario, Spanned};
use crate::timestamp::{LogIndex, Timestamp};

#[derive(Clone, Copy, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    pub replicas: u32,
    pub ops: u32,
    /// Also sweep every log prefix as a version and sample diff pairs.
    /// Costs O(len²) per replica, so off by default.
    pub deep: bool,
}

impl FuzzConfig {
    pub fn new(seed: u64, replicas: u32, ops: u32) -> Self {
        FuzzConfig { seed, replicas: replicas.max(1), ops: ops.max(1), deep: false }
    }

    pub fn deep(mut self) -> Self {
        self.deep = true;
        self
    }
}

#[derive(Clone, Debug)]
pub struct FuzzReport {
    pub seed: u64,
    pub replicas: u32,
    pub ops: u32,
    pub commands: usize,
    /// Converged log length and text size (0 when the run failed early).
    pub entries: u32,
    pub chars: usize,
    pub failures: Vec<String>,
    pub minimized: Option<Scenario>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self) -> String {
        let head = format!(
            "fuzz seed={} replicas={} ops={}",
            self.seed, self.replicas, self.ops
        );
        if self.passed() {
            return format!(
                "{head}: PASS ({} commands, {} entries, {} chars)\n",
                self.commands, self.entries, self.chars
            );
        }
        let mut out = format!("{head}: FAIL\n");
        for f in &self.failures {
            out.push_str(&format!("  - {f}\n"));
        }
        if let Some(s) = &self.minimized {
            out.push_str(&format!("minimized scenario ({} commands):\n", s.commands.len()));
            out.push_str(&s.render());
        }
        out
    }
}

/// Mostly plain text, a few characters picked to stress the encodings:
/// multi-byte UTF-8 and codepoints needing five or six hex digits on the
/// wire, plus the escaped whitespace forms.
const PLAIN: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'o', 'r', 's', 't', 'A', 'Z', '0', '7', ' ', '.',
];
const SPICE: &[char] = &['\n', '\t', '"', '\\', 'é', '∀', '\u{1D54F}', '\u{10FFFD}'];

fn random_char(rng: &mut ChaCha8Rng) -> char {
    if rng.gen_range(0..100) < 88 {
        PLAIN[rng.gen_range(0..PLAIN.len())]
    } else {
        SPICE[rng.gen_range(0..SPICE.len())]
    }
}

fn replica_name(i: u32) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("r{i}")
    }
}

fn to_scenario(commands: Vec<Command>) -> Scenario {
    Scenario {
        commands: commands
            .into_iter()
            .enumerate()
            .map(|(i, value)| Spanned { line: i + 1, value })
            .collect(),
    }
}

fn converged(engine: &Engine, names: &[Author]) -> bool {
    let first = engine.doc(names[0]).unwrap();
    names.iter().all(|&n| {
        let d = engine.doc(n).unwrap();
        d.len() == first.len() && d.render_text() == first.render_text()
    })
}

/// Build a valid scenario: every command is applied to a live engine as it
/// is drawn, so positions are always in range and syncs always admissible.
/// Ends with mesh sync rounds until all replicas agree.
pub fn generate(cfg: &FuzzConfig) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let names: Vec<Author> =
        (0..cfg.replicas).map(|i| Author::new(&replica_name(i)).unwrap()).collect();
    let mut engine = Engine::new();
    let mut commands = Vec::new();
    for &name in &names {
        engine.add_replica(name).unwrap();
        commands.push(Command::Replica { name });
    }

    let mut authored = 0u32;
    while authored < cfg.ops {
        let r = names[rng.gen_range(0..names.len())];
        let visible = engine.doc(r).unwrap().visible_len();
        let roll = rng.gen_range(0..100u32);
        let budget = (cfg.ops - authored) as usize;
        let cmd = if engine.doc(r).unwrap().is_empty() {
            // This replica has not even seen the root yet.
            Command::Sync { from: names[0], to: r }
        } else if roll < 55 || visible == 0 {
            let pos = rng.gen_range(0..=visible);
            let len = rng.gen_range(1..=6).min(budget);
            let text: String = (0..len).map(|_| random_char(&mut rng)).collect();
            Command::Insert { replica: r, pos, text }
        } else if roll < 80 {
            let pos = rng.gen_range(0..visible);
            let len = rng.gen_range(1..=4).min(visible - pos).min(budget);
            Command::Delete { replica: r, pos, len }
        } else {
            let from = names[rng.gen_range(0..names.len())];
            if from == r {
                continue;
            }
            Command::Sync { from, to: r }
        };
        match &cmd {
            Command::Insert { replica, pos, text } => {
                authored += engine.insert(*replica, *pos, text).unwrap().len() as u32;
            }
            Command::Delete { replica, pos, len } => {
                authored += engine.delete(*replica, *pos, *len).unwrap().len() as u32;
            }
            Command::Sync { from, to } => {
                engine.sync(*from, *to).unwrap();
            }
            _ => unreachable!(),
        }
        commands.push(cmd);
    }

    for _round in 0..12 {
        if converged(&engine, &names) {
            break;
        }
        for &from in &names {
            for &to in &names {
                if from != to {
                    engine.sync(from, to).unwrap();
                    commands.push(Command::Sync { from, to });
                }
            }
        }
    }
    assert!(converged(&engine, &names), "mesh rounds did not reach quiescence");
    to_scenario(commands)
}

/// Everything that must hold on a quiesced fleet. Each returned string is
/// one broken invariant.
fn invariant_failures(engine: &Engine, cfg: &FuzzConfig) -> Vec<String> {
    let mut fails = Vec::new();
    let names = engine.replicas();
    if names.is_empty() {
        return fails;
    }
    let docs: Vec<&Doc> = names.iter().map(|&n| engine.doc(n).unwrap()).collect();
    let first = docs[0];

    // Convergence, and agreement with the brute-force reading of the op set.
    for d in &docs {
        if d.len() != first.len() {
            fails.push(format!(
                "log lengths diverge: {} has {}, {} has {}",
                d.author(),
                d.len(),
                first.author(),
                first.len()
            ));
        }
        if d.render_text() != first.render_text() {
            fails.push(format!(
                "texts diverge: {} renders {:?}, {} renders {:?}",
                d.author(),
                d.render_text(),
                first.author(),
                first.render_text()
            ));
        }
    }
    if first.len() > 0 {
        match OpSet::from_log_prefix(first.log(), first.len()) {
            Ok(set) => {
                let want = oracle::text(&set);
                if first.render_text() != want {
                    fails.push(format!(
                        "oracle disagrees: engine {:?}, oracle {:?}",
                        first.render_text(),
                        want
                    ));
                }
            }
            Err(e) => fails.push(format!("op set of {} is broken: {e}", first.author())),
        }
    }

    let logs: Vec<&ReplicaLog> = docs.iter().map(|d| d.log()).collect();
    for v in check_axioms(&logs) {
        fails.push(format!(
            "axiom {} broken at {} entry {}: {}",
            v.axiom, v.author, v.index, v.description
        ));
    }

    for d in &docs {
        for problem in d.check_integrity() {
            fails.push(format!("{} integrity: {problem}", d.author()));
        }
    }

    // Index structures agree with the stored log, and absent timestamps
    // resolve to nothing.
    for d in &docs {
        let mut probe = (*d).clone();
        for raw in 1..=d.len() {
            let j = LogIndex::new(raw).unwrap();
            let t = match d.inverse_ndx(j) {
                Ok(t) => t,
                Err(e) => {
                    fails.push(format!("{} inverse_ndx({raw}): {e}", d.author()));
                    continue;
                }
            };
            if probe.fast_ndx(t) != Some(j) {
                fails.push(format!("{} fast_ndx({t}) != {raw}", d.author()));
            }
            if d.log().ndx(t) != Some(j) {
                fails.push(format!("{} linear ndx({t}) != {raw}", d.author()));
            }
            if d.log().get(j).map(|op| op.id) != Some(t) {
                fails.push(format!("{} log entry {raw} is not {t}", d.author()));
            }
        }
        let absent = Timestamp::new(d.len() + 7, d.author());
        if probe.fast_ndx(absent).is_some() {
            fails.push(format!("{} resolves absent {absent}", d.author()));
        }
        let stranger = Timestamp::new(1, Author::new("@@").unwrap());
        if probe.fast_ndx(stranger).is_some() {
            fails.push(format!("{} resolves foreign {stranger}", d.author()));
        }
    }

    // Rewriting history locally must not change what anyone reads, and the
    // rewritten co-structures collapse to single spans.
    for d in &docs {
        if d.is_empty() {
            continue;
        }
        let r = d.rebase();
        if r.render_text() != d.render_text() {
            fails.push(format!("{} rebase changed the text", d.author()));
        }
        let cs = r.costructures();
        let spans = (
            cs.author_spans().count(),
            cs.shift_spans().count(),
            cs.next_entries().count(),
        );
        if spans != (1, 1, 1) {
            fails.push(format!(
                "{} rebase spans: authors={} shifts={} next={}",
                d.author(),
                spans.0,
                spans.1,
                spans.2
            ));
        }
        if r.check_integrity() != Vec::<String>::new() {
            fails.push(format!("{} rebase broke integrity", d.author()));
        }
    }

    if cfg.deep {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_CAFE);
        for d in &docs {
            for k in 1..=d.len() {
                let got = d.render_version(Version(k)).unwrap();
                let want = match OpSet::from_log_prefix(d.log(), k) {
                    Ok(set) => oracle::text(&set),
                    Err(e) => {
                        fails.push(format!("{} prefix {k} not closed: {e}", d.author()));
                        continue;
                    }
                };
                if got != want {
                    fails.push(format!(
                        "{} version {k}: engine {got:?}, oracle {want:?}",
                        d.author()
                    ));
                }
            }
            let n = d.len();
            if n == 0 {
                continue;
            }
            for _ in 0..DIFF_SAMPLES_PER_DOC {
                let i = rng.gen_range(1..=n);
                let j = rng.gen_range(i..=n);
                let from = d.render_version(Version(i)).unwrap();
                let to = d.render_version(Version(j)).unwrap();
                let splices = d.diff_versions(Version(i), Version(j)).unwrap();
                if apply_splices(&from, &splices) != to {
                    fails.push(format!(
                        "{} diff {i}->{j} does not reproduce the target",
                        d.author()
                    ));
                }
            }
        }
    }
    fails
}

pub const DIFF_SAMPLES_PER_DOC: usize = 20;

/// Replay a scenario and report broken invariants. Execution errors are a
/// failure in their own right (generated scenarios always execute).
pub fn check_scenario(scenario: &Scenario, cfg: &FuzzConfig) -> Vec<String> {
    match execute_scenario(scenario) {
        Ok((_, engine)) => invariant_failures(&engine, cfg),
        Err(e) => vec![format!("execution failed: {e}")],
    }
}

/// Greedy command deletion to a fixpoint: drop any single command whose
/// removal still provokes `fails`.
fn minimize_with(scenario: &Scenario, fails: impl Fn(&Scenario) -> bool) -> Scenario {
    let mut current = scenario.clone();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < current.commands.len() {
            let mut trial = current.clone();
            trial.commands.remove(i);
            if fails(&trial) {
                current = trial;
                changed = true;
            } else {
                i += 1;
            }
        }
        if !changed {
            return current;
        }
    }
}

pub fn fuzz_one(cfg: &FuzzConfig) -> FuzzReport {
    let scenario = generate(cfg);
    let mut entries = 0;
    let mut chars = 0;
    let failures = match execute_scenario(&scenario) {
        Ok((_, engine)) => {
            if let Some(&name) = engine.replicas().first() {
                let doc = engine.doc(name).unwrap();
                entries = doc.len();
                chars = doc.render_text().chars().count();
            }
            invariant_failures(&engine, cfg)
        }
        Err(e) => vec![format!("execution failed: {e}")],
    };
    let minimized = if failures.is_empty() {
        None
    } else {
        // A minimized trial must still execute AND break an invariant;
        // trials that fail to execute are rejected, not shrunk into.
        Some(minimize_with(&scenario, |s| {
            matches!(execute_scenario(s), Ok((_, ref engine))
                if !invariant_failures(engine, cfg).is_empty())
        }))
    };
    FuzzReport {
        seed: cfg.seed,
        replicas: cfg.replicas,
        ops: cfg.ops,
        commands: scenario.commands.len(),
        entries,
        chars,
        failures,
        minimized,
    }
}
