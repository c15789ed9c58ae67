//! Randomized checks of the preservation lemmas behind the TP2 and
//! concavity results. Any failure carries the seed and trial needed to
//! rebuild the instance with `run_trial`.
//!
//! ```text
//! cargo run --release --example lemma_suite -- <seed> <trials>
//! ```

use bomber_dp::props::property_suite;

fn main() -> bomber_dp::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(1, |s| s.parse().expect("seed"));
    let trials = args.next().map_or(200, |s| s.parse().expect("trials"));

    let report = property_suite(seed, trials)?;
    for l in &report.lemmas {
        println!(
            "{:<26} {} trials, {} failures, {} oracle disagreements",
            l.lemma.to_string(),
            l.trials,
            l.failures,
            l.oracle_disagreements
        );
    }
    if let Some(f) = report.failures.first() {
        println!("first failure: {}", serde_json::to_string(f)?);
    }
    println!("passed: {}", report.passed);
    Ok(())
}
