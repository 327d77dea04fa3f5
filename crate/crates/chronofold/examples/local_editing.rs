//! Local text editing on a single replica: inserts, tombstoned deletes,
//! sticky formatting, and line navigation.
//!
//! Run with:
//! ```not_rust
//! cargo run -q --example local_editing
//! ```

use chronofold::{Attribute, Author, Doc};

fn main() {
    let mut doc = Doc::new(Author::new("solo").unwrap());

    doc.insert_text(0, "hello world").unwrap();
    doc.insert_text(5, ",").unwrap();
    assert_eq!(doc.render_text(), "hello, world");

    // Formatting attaches to log entries, not text positions, so edits
    // elsewhere never shift it. Mark "hello" while its entries are fresh.
    let from = doc.visible_index(0).unwrap();
    let to = doc.visible_index(5).unwrap();
    let highlight = Attribute(1);
    doc.set_format(from, to, highlight).unwrap();

    // Deletions tombstone characters instead of moving anything; the log
    // only ever grows, and the highlight stays on its entries.
    let entries_before = doc.len();
    doc.delete_text(0, 5).unwrap();
    doc.insert_text(0, "goodbye").unwrap();
    assert_eq!(doc.render_text(), "goodbye, world");
    assert!(doc.len() > entries_before);
    assert_eq!(doc.format_at(from).unwrap(), highlight);

    // Line navigation walks the weave: line n starts after the (n-1)-th
    // live newline.
    let mut page = Doc::new(Author::new("pager").unwrap());
    page.insert_text(0, "alpha\nbeta\ngamma").unwrap();
    let second = page.line_start(2).unwrap();
    let third = page.line_start(3).unwrap();
    assert!(page.line_start(4).is_err());
    println!("text:   {:?}", page.render_text());
    println!("line 2 starts at log entry {second}");
    println!("line 3 starts at log entry {third}");

    println!("edited: {:?} ({} log entries)", doc.render_text(), doc.len());
}
