//! Fuzzy probability of failure for a limit state with random load and
//! fuzzy resistance: `g(y, z) = z1 - (z2 + 0.3 y)`, failure when `g ≤ 0`.

use fsuq::extension::{failure_probability, CutSampling};
use fsuq::field::{DrawSet, Sampler};
use fsuq::fuzzy::DEFAULT_LEVELS;
use fsuq::{FuzzyVariable, FuzzyVector, Result};

fn main() -> Result<()> {
    let z = FuzzyVector::fully_interactive(vec![
        FuzzyVariable::triangular(1.6, 1.8, 1.9)?,
        FuzzyVariable::triangular(0.9, 1.0, 1.2)?,
    ])?;
    let draws = DrawSet::standard_normal(&mut Sampler::new(11), 10_000, 1);
    let g = |y: &[f64], z: &[f64]| Ok(z[0] - (z[1] + 0.3 * y[0]));
    let pf = failure_probability(&g, &z, &draws, &DEFAULT_LEVELS, &CutSampling::default())?;
    for (alpha, cut) in pf.levels().iter().zip(pf.cuts()) {
        println!("alpha {alpha:.2}: P_f in {cut}");
    }
    Ok(())
}
