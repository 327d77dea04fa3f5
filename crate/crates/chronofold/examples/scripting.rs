//! Multi-replica sessions described as plain-text scenarios: declare
//! replicas, edit, sync, and state what each replica should display.
//!
//! Run with:
//! ```not_rust
//! cargo run -q --example scripting
//! ```

use chronofold::script::{run_script, Scenario};

fn main() {
    // The classic three-replica session: a typo fixed concurrently with
    // new typing, converging everywhere that has seen all ops.
    let pinsk = include_str!("../../../scenarios/pinsk.cfs");
    let transcript = run_script(pinsk).unwrap();
    print!("{}", transcript.render());
    assert!(!transcript.failed);

    // Scenarios parse into a value you can build or rewrite, and render
    // back to canonical text.
    let scenario = Scenario::parse(pinsk).unwrap();
    let canonical = scenario.render();
    assert_eq!(Scenario::parse(&canonical).unwrap().render(), canonical);

    // Expectations that fail do not stop the run; they mark the transcript.
    let failing = concat!(
        "replica solo\n",
        "insert solo 0 \"right\"\n",
        "expect solo \"wrong\"\n",
        "expect solo \"right\"\n",
    );
    let transcript = run_script(failing).unwrap();
    assert!(transcript.failed);
    println!("\nfailing expectation, by design:");
    print!("{}", transcript.render());
}
