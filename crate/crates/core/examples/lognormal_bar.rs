//! The lognormal-bar study: fuzzy mean end displacement, fuzzy mean field
//! near the loaded end, and fuzzy CDF of the end displacement, for both
//! interaction modes.
//!
//! `cargo run --release --example lognormal_bar [samples]`

use fsuq::studies::LognormalStudy;
use fsuq::{Interaction, Result};

fn main() -> Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let study = LognormalStudy { samples, ..Default::default() };
    let draws = study.draws()?;
    let non = study.run(Interaction::NonInteractive, &draws)?;
    let full = study.run(Interaction::FullyInteractive, &draws)?;

    println!("mean end displacement, alpha: non-interactive | fully interactive");
    for ((a, n), f) in non.q1.levels().iter().zip(non.q1.cuts()).zip(full.q1.cuts()) {
        println!("  {a:.2}: {n} | {f}");
    }
    println!("Monte Carlo standard error at the mode: {:.2e}", non.q1_modal_std / (samples as f64).sqrt());

    let (x, field) = &full.q2[10];
    println!("\nfully interactive mean field at x = {x}: zero-cut {}", field.support());
    let k = 20; // u0 = 0.4
    println!(
        "CDF at u0 = {}: non-interactive band [{:.3}, {:.3}], fully interactive [{:.3}, {:.3}]",
        non.q3.grid()[k],
        non.q3.right(0)[k],
        non.q3.left(0)[k],
        full.q3.right(0)[k],
        full.q3.left(0)[k]
    );
    Ok(())
}
