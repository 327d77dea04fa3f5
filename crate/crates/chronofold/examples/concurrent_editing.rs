//! Two replicas edit the same document concurrently and converge to the
//! same text, whichever order their ops arrive in.
//!
//! Run with:
//! ```not_rust
//! cargo run -q --example concurrent_editing
//! ```

use chronofold::{sync, Author, Doc};

fn main() {
    let mut alice = Doc::new(Author::new("alice").unwrap());
    alice.insert_text(0, "the quick fox").unwrap();

    // Bob joins by replicating Alice's log, then both edit while apart.
    let mut bob = Doc::join(Author::new("bob").unwrap());
    sync(&alice, &mut bob).unwrap();
    assert_eq!(bob.render_text(), "the quick fox");

    alice.insert_text(10, "brown ").unwrap();
    bob.delete_text(0, 4).unwrap();
    bob.insert_text(0, "a ").unwrap();

    // Exchange one way, then the other. Merging appends entries and
    // rewrites single links; nothing already written moves.
    sync(&alice, &mut bob).unwrap();
    sync(&bob, &mut alice).unwrap();

    assert_eq!(alice.render_text(), bob.render_text());
    assert_eq!(alice.render_text(), "a quick brown fox");
    println!("converged: {:?}", alice.render_text());

    // Concurrent inserts at the same spot stay contiguous per author and
    // order deterministically, so a third replica replaying everything in
    // a different order still agrees.
    let mut carol = Doc::join(Author::new("carol").unwrap());
    sync(&bob, &mut carol).unwrap();
    assert_eq!(carol.render_text(), alice.render_text());
    println!("weave:     {:?}", carol.weave().map(|j| j.get()).collect::<Vec<_>>());
}
