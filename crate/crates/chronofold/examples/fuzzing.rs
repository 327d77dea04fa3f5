//! Randomized convergence testing: generated multi-replica schedules, a
//! full invariant sweep, and command-deletion minimization on failure.
//!
//! Run with:
//! ```not_rust
//! cargo run -q --example fuzzing
//! ```

use chronofold::fuzz::{check_scenario, fuzz_one, generate, FuzzConfig};

fn main() {
    // One seeded case: generate, execute, check every invariant.
    let cfg = FuzzConfig::new(42, 3, 120);
    let report = fuzz_one(&cfg);
    print!("{}", report.render());
    assert!(report.passed());

    // Deep mode also replays every prefix version and samples diffs
    // between random version pairs on every replica.
    let deep = FuzzConfig::new(7, 4, 60).deep();
    let report = fuzz_one(&deep);
    print!("{}", report.render());
    assert!(report.passed());

    // The pieces are usable on their own: a generated scenario is an
    // ordinary script value, and the checker reports problems as strings.
    let scenario = generate(&cfg);
    let failures = check_scenario(&scenario, &cfg);
    assert!(failures.is_empty(), "{failures:?}");
    println!("generated scenario, first lines:");
    for line in scenario.render().lines().take(6) {
        println!("  {line}");
    }

    // A sweep over many seeds is just a loop.
    let clean = (0..8u64).all(|seed| fuzz_one(&FuzzConfig::new(seed, 3, 80)).passed());
    assert!(clean);
    println!("8 seeds swept clean");
}
