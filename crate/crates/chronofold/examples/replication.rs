//! The plain-text wire format and the admission checks that keep a replica
//! consistent when batches arrive damaged or out of order.
//!
//! Run with:
//! ```not_rust
//! cargo run -q --example replication
//! ```

use chronofold::{decode_batch, encode_batch, Author, BatchErrorKind, Doc};

fn main() {
    let mut source = Doc::new(Author::new("src").unwrap());
    source.insert_text(0, "wire").unwrap();

    // A batch is a header plus one line per op; it survives a text trip.
    let batch = source.ops_since(0).unwrap();
    let text = encode_batch(&batch);
    print!("{text}");
    assert_eq!(decode_batch(&text).unwrap(), batch);

    // A fresh replica replays the whole history.
    let mut sink = Doc::join(Author::new("dst").unwrap());
    assert_eq!(sink.apply_batch(&batch).unwrap(), 5);
    assert_eq!(sink.render_text(), "wire");

    // After that, only news travels: the receiver remembers how much of
    // each peer's log it has consumed.
    source.insert_text(4, "!").unwrap();
    let known = sink.peer_known_length(source.author());
    let delta = source.ops_since(known).unwrap();
    assert_eq!(delta.ops.len(), 1);
    sink.apply_batch(&delta).unwrap();
    assert_eq!(sink.render_text(), "wire!");

    // Damaged batches are refused with a reason, and nothing before the
    // fault is lost.
    let mut torn = source.ops_since(0).unwrap();
    torn.ops.remove(1);
    let err = Doc::join(Author::new("x").unwrap()).apply_batch(&torn).unwrap_err();
    assert_eq!(err.kind, BatchErrorKind::BadAuthorIndex);
    println!("torn batch refused: {err}");

    // Re-delivering an old batch is harmless: duplicates are skipped.
    let replay = source.ops_since(0).unwrap();
    assert_eq!(sink.apply_batch(&replay).unwrap(), 0);
    assert_eq!(sink.render_text(), "wire!");
}
