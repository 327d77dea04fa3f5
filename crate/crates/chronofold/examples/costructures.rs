//! The range maps kept beside the log: who wrote each run of entries, how
//! names translate to positions, and how the weave threads the text.
//!
//! Run with:
//! ```not_rust
//! cargo run -q --example costructures
//! ```

use chronofold::{sync, Author, Doc, Timestamp};

fn main() {
    let ann = Author::new("ann").unwrap();
    let ben = Author::new("ben").unwrap();

    let mut left = Doc::new(ann);
    left.insert_text(0, "abc").unwrap();
    let mut right = Doc::join(ben);
    sync(&left, &mut right).unwrap();
    right.insert_text(3, "xyz").unwrap();
    // ann types more before ben's ops arrive, so ben's entries land at
    // later positions than ben numbered them: a shifted span.
    left.insert_text(0, "12").unwrap();
    sync(&right, &mut left).unwrap();
    left.delete_text(0, 2).unwrap();
    assert_eq!(left.render_text(), "abcxyz");

    // Entries arrive in runs, so per-entry data compresses into spans.
    println!("author spans:");
    for (start, who) in left.costructures().author_spans() {
        println!("  from entry {start}: {who}");
    }
    println!("shift spans (entry position minus author index):");
    for (start, shift) in left.costructures().shift_spans() {
        println!("  from entry {start}: {shift}");
    }

    // Names resolve to local positions without scanning the log, and a
    // missing op answers in one comparison against the high-water mark.
    let t = Timestamp::new(2, ben);
    assert_eq!(left.fast_ndx(t), left.log().ndx(t));
    assert_eq!(left.fast_ndx(Timestamp::new(99, ben)), None);
    println!("high water for {ben}: {}", left.costructures().high_water(ben));

    // The weave is embedded in next links; tombstones stay in place, so
    // the live character count and the entry count differ.
    let weave: Vec<u32> = left.weave().map(|j| j.get()).collect();
    println!("weave order: {weave:?}");
    println!("entries: {}, live characters: {}", left.len(), left.visible_len());
    assert!(left.visible_len() < left.len() as usize);
}
