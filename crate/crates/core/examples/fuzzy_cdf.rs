//! Fuzzy CDFs as nested p-boxes: a normal law with a fuzzy mean (type I)
//! and the CDF of a function of random and fuzzy inputs (type II).

use fsuq::extension::{fuzzy_cdf_type1, fuzzy_cdf_type2, CutSampling};
use fsuq::field::{DrawSet, Sampler};
use fsuq::fuzzy::DEFAULT_LEVELS;
use fsuq::translation::standard_normal_cdf;
use fsuq::{FuzzyVariable, FuzzyVector, Result};

fn main() -> Result<()> {
    let grid: Vec<f64> = (0..=12).map(|k| -3.0 + 0.5 * k as f64).collect();

    let mean = FuzzyVector::non_interactive(vec![FuzzyVariable::triangular(-0.5, 0.0, 0.5)?])?;
    let type1 = fuzzy_cdf_type1(
        |y0, theta| Ok(standard_normal_cdf(y0 - theta[0])),
        &mean,
        &grid,
        &DEFAULT_LEVELS,
        &CutSampling::uniform(41),
    )?;
    assert!(type1.validate().is_empty());

    // q(y, z) = z1 + z2 y with y ~ N(0, 1)
    let z = FuzzyVector::non_interactive(vec![
        FuzzyVariable::triangular(-0.5, 0.0, 0.5)?,
        FuzzyVariable::triangular(0.8, 1.0, 1.2)?,
    ])?;
    let draws = DrawSet::standard_normal(&mut Sampler::new(7), 20_000, 1);
    let q = |y: &[f64], z: &[f64]| Ok(z[0] + z[1] * y[0]);
    let type2 = fuzzy_cdf_type2(&q, &z, &draws, &grid, &DEFAULT_LEVELS, &CutSampling::default())?;
    assert!(type2.validate().is_empty());

    println!("   u0   | type I band at alpha 0 | type II band at alpha 0 | type II at alpha 1");
    for (k, u0) in grid.iter().enumerate() {
        println!(
            "{u0:6.2} | [{:.3}, {:.3}]         | [{:.3}, {:.3}]          | [{:.3}, {:.3}]",
            type1.right(0)[k],
            type1.left(0)[k],
            type2.right(0)[k],
            type2.left(0)[k],
            type2.right(4)[k],
            type2.left(4)[k],
        );
    }
    Ok(())
}
