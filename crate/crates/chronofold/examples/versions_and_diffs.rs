//! Every log prefix is a readable version, and any two versions of one
//! replica diff into a small set of splices.
//!
//! Run with:
//! ```not_rust
//! cargo run -q --example versions_and_diffs
//! ```

use chronofold::diff::apply_splices;
use chronofold::{Author, Doc, Version};

fn main() {
    let mut doc = Doc::new(Author::new("draft").unwrap());
    doc.insert_text(0, "carpet").unwrap();
    doc.delete_text(0, 3).unwrap();
    doc.insert_text(0, "trum").unwrap();
    assert_eq!(doc.render_text(), "trumpet");

    // Versions are prefix lengths of the log; nothing is stored twice.
    for k in [1, 7, 10, doc.len()] {
        println!("version {k:>2}: {:?}", doc.render_version(Version(k)).unwrap());
    }

    // A diff names what changed between two versions, as splices over the
    // older text.
    let old = Version(7);
    let new = Version(doc.len());
    let splices = doc.diff_versions(old, new).unwrap();
    for s in &splices {
        println!("at {} remove {} insert {:?}", s.pos, s.delete_len, s.insert);
    }

    let old_text = doc.render_version(old).unwrap();
    let new_text = doc.render_version(new).unwrap();
    assert_eq!(apply_splices(&old_text, &splices), new_text);
    println!("{old_text:?} + {} splices = {new_text:?}", splices.len());

    // Versions are prefixes, so diffs only run forward in time.
    assert!(doc.diff_versions(new, old).is_err());
}
