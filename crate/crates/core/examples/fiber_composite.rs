//! The fiber-composite study on the built-in decagonal moments: fuzzy mean
//! displacement field, fuzzy CDF and fuzzy failure probability at L/4.
//!
//! `cargo run --release --example fiber_composite [samples] [points per cut]`

use fsuq::data::composite_moments;
use fsuq::extension::CutSampling;
use fsuq::studies::CompositeStudy;
use fsuq::Result;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().ok());
    let samples = args.next().flatten().unwrap_or(2_000);
    let resolution = args.next().flatten().unwrap_or(61);
    let study = CompositeStudy {
        samples,
        sampling: CutSampling::uniform(resolution),
        critical: vec![6.9e-5, 7.2e-5],
        ..Default::default()
    };
    let moments = composite_moments()?;
    let kl = study.expansion()?;
    let m = study.truncation(&kl)?;
    let draws = study.draws(&kl, m)?;
    let out = study.run(&moments, &kl, &draws)?;

    println!("KL terms: {m} ({:.3} of the variance)", out.retained_variance);
    for (x, v) in out.q4.iter().step_by(25) {
        println!("mean u at x = {:.0} um: zero-cut {}, core {}", x * 1e6, v.support(), v.core());
    }
    for (ucr, pf) in &out.q6 {
        println!("\nP(u(L/4) >= {ucr:e}):");
        for (a, c) in pf.levels().iter().zip(pf.cuts()) {
            println!("  alpha {a:.2}: {c}");
        }
    }
    Ok(())
}
