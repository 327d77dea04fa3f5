//! Property tests: ordering laws, wire codec round trips, a shadow-string
//! model for local editing, and byte stability of saved documents.

use chronofold::dump::{dump, load, What};
use chronofold::fuzz::{check_scenario, generate, FuzzConfig};
use chronofold::script::{execute_scenario, Scenario};
use chronofold::{decode_batch, decode_op, encode_op, Author, Doc, Op, OpValue, Timestamp};
use proptest::prelude::*;

/// Author ids are 1 to 16 bytes of printable ASCII without whitespace.
fn arb_author() -> impl Strategy<Value = Author> {
    "[!-~]{1,16}".prop_map(|s| Author::new(&s).unwrap())
}

fn arb_timestamp() -> impl Strategy<Value = Timestamp> {
    (1u32..10_000, arb_author()).prop_map(|(andx, a)| Timestamp::new(andx, a))
}

/// Any op that passes shape validation: a root, or a char/tombstone whose
/// author index lies strictly above its parent's.
fn arb_op() -> impl Strategy<Value = Op> {
    let payload = prop_oneof![
        Just(OpValue::Tombstone),
        any::<char>().prop_map(OpValue::Char),
    ];
    prop_oneof![
        arb_author().prop_map(Op::root),
        (arb_timestamp(), 1u32..500, arb_author(), payload).prop_map(
            |(parent, delta, author, val)| {
                let id = Timestamp::new(parent.andx + delta, author);
                Op::new(id, parent, val).unwrap()
            }
        ),
    ]
}

proptest! {
    #[test]
    fn timestamp_order_is_lexicographic(a in arb_timestamp(), b in arb_timestamp()) {
        let expected = (a.andx, a.author.as_str()).cmp(&(b.andx, b.author.as_str()));
        prop_assert_eq!(a.cmp(&b), expected);
        prop_assert_eq!(b.cmp(&a), expected.reverse());
        prop_assert_eq!(a == b, expected.is_eq());
    }

    #[test]
    fn wire_op_round_trips(op in arb_op()) {
        prop_assert_eq!(decode_op(&encode_op(&op)), Ok(op));
    }

    #[test]
    fn wire_rejects_garbage_without_panicking(line in any::<String>()) {
        // Errors are fine; falling over is not.
        let _ = decode_op(&line);
        let _ = decode_batch(&line);
        let _ = load(&line);
    }
}

/// One scripted local edit: an insertion of `ch` or a single-char deletion,
/// with the position derived from `pos_seed` so it always lands in range.
#[derive(Clone, Debug)]
enum EditCmd {
    Insert { pos_seed: usize, ch: char },
    Delete { pos_seed: usize },
}

fn arb_edits() -> impl Strategy<Value = Vec<EditCmd>> {
    let cmd = prop_oneof![
        (any::<usize>(), any::<char>()).prop_map(|(pos_seed, ch)| EditCmd::Insert { pos_seed, ch }),
        any::<usize>().prop_map(|pos_seed| EditCmd::Delete { pos_seed }),
    ];
    proptest::collection::vec(cmd, 0..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A plain vector of chars predicts every render, and the log holds
    /// exactly the ops the edits returned, in order, after the root.
    #[test]
    fn local_edits_match_shadow_string(edits in arb_edits()) {
        let mut doc = Doc::new(Author::new("solo").unwrap());
        let mut model: Vec<char> = Vec::new();
        let mut expected_ops = vec![doc.log().entries()[0]];
        for cmd in edits {
            match cmd {
                EditCmd::Insert { pos_seed, ch } => {
                    let pos = pos_seed % (model.len() + 1);
                    let ops = doc.insert_text(pos, &ch.to_string()).unwrap();
                    model.insert(pos, ch);
                    expected_ops.extend(ops);
                }
                EditCmd::Delete { pos_seed } => {
                    if model.is_empty() {
                        continue;
                    }
                    let pos = pos_seed % model.len();
                    let ops = doc.delete_text(pos, 1).unwrap();
                    model.remove(pos);
                    expected_ops.extend(ops);
                }
            }
            prop_assert_eq!(doc.render_text(), model.iter().collect::<String>());
        }
        prop_assert_eq!(doc.log().entries(), expected_ops.as_slice());
        prop_assert!(doc.check_integrity().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Engine-generated scenarios always converge and satisfy every
    /// invariant the fuzz checker knows about.
    #[test]
    fn generated_scenarios_pass_all_checks(
        seed in any::<u64>(),
        replicas in 1u32..=4,
        ops in 0u32..=50,
    ) {
        let cfg = FuzzConfig::new(seed, replicas, ops);
        prop_assert_eq!(check_scenario(&generate(&cfg), &cfg), Vec::<String>::new());
    }

    /// Scenario text is a fixpoint of render/parse, and both copies execute
    /// to identical outcomes.
    #[test]
    fn scenario_text_round_trips(
        seed in any::<u64>(),
        replicas in 1u32..=4,
        ops in 0u32..=40,
    ) {
        let scenario = generate(&FuzzConfig::new(seed, replicas, ops));
        let text = scenario.render();
        let reparsed = Scenario::parse(&text).unwrap();
        prop_assert_eq!(reparsed.render(), text.clone());

        let (a, _) = execute_scenario(&scenario).unwrap();
        let (b, _) = execute_scenario(&reparsed).unwrap();
        let texts = |t: &chronofold::script::Transcript| {
            t.finals.iter().map(|f| f.text.clone()).collect::<Vec<_>>()
        };
        prop_assert_eq!(texts(&a), texts(&b));
        prop_assert_eq!(a.failed, b.failed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Saving any replica and loading it back reproduces the dump byte for
    /// byte, and the reloaded copy renders the same text.
    #[test]
    fn dump_load_is_byte_stable(
        seed in any::<u64>(),
        replicas in 1u32..=3,
        ops in 0u32..=40,
    ) {
        let scenario = generate(&FuzzConfig::new(seed, replicas, ops));
        let (_, engine) = execute_scenario(&scenario).unwrap();
        for &name in engine.replicas() {
            let doc = engine.doc(name).unwrap();
            let first = dump(doc, What::Chronofold);
            let rebuilt = load(&first).unwrap();
            prop_assert_eq!(dump(&rebuilt, What::Chronofold), first);
            prop_assert_eq!(rebuilt.render_text(), doc.render_text());
        }
    }
}
