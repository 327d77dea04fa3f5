//! Compacting a long-lived document: rebase re-expresses the visible text
//! as one fresh sequential insertion, shedding tombstones and history.
//!
//! Run with:
//! ```not_rust
//! cargo run -q --example rebase
//! ```

use chronofold::{sync, Author, Doc};

fn main() {
    let mut doc = Doc::new(Author::new("editor").unwrap());
    doc.insert_text(0, "a rough draft, full of fixes").unwrap();
    doc.delete_text(2, 6).unwrap();
    doc.insert_text(2, "final ").unwrap();
    doc.delete_text(13, 15).unwrap();
    assert_eq!(doc.render_text(), "a final draft");

    // Collaboration history from a second replica mixes authors in.
    let mut peer = Doc::join(Author::new("peer").unwrap());
    sync(&doc, &mut peer).unwrap();
    peer.insert_text(13, " indeed").unwrap();
    sync(&peer, &mut doc).unwrap();
    assert_eq!(doc.render_text(), "a final draft indeed");

    let spans_before = doc.costructures().author_spans().count();
    println!("before: {} entries, {} author spans", doc.len(), spans_before);

    // Same text, single author, no tombstones; every per-entry map
    // collapses to one span.
    let compact = doc.rebase();
    assert_eq!(compact.render_text(), doc.render_text());
    assert_eq!(compact.len() as usize, doc.visible_len() + 1);
    assert_eq!(compact.costructures().author_spans().count(), 1);
    assert_eq!(compact.costructures().shift_spans().count(), 1);
    assert_eq!(compact.costructures().next_entries().count(), 1);
    println!("after:  {} entries, 1 author span", compact.len());

    // The compacted document is a normal document; editing continues.
    let mut compact = compact;
    compact.insert_text(0, "» ").unwrap();
    println!("still editable: {:?}", compact.render_text());
}
