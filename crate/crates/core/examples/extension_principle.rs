//! Zadeh's extension principle by optimization over joint cuts, checked
//! against a brute-force evaluation of the sup-min formula.

use fsuq::extension::{extend, extend_oracle, oracle_grid, sampled_cut, CutSampling};
use fsuq::fuzzy::DEFAULT_LEVELS;
use fsuq::{FuzzyVariable, FuzzyVector, Interaction, Result};

fn main() -> Result<()> {
    let inputs = vec![FuzzyVariable::triangular(1.0, 2.0, 3.0)?, FuzzyVariable::triangular(-1.0, 0.5, 1.0)?];
    let g = |z: &[f64]| Ok(z[0] * z[0] - z[1]);
    for mode in [Interaction::NonInteractive, Interaction::FullyInteractive] {
        let fvec = FuzzyVector::new(inputs.clone(), mode)?;
        let out = extend(&g, &fvec, &DEFAULT_LEVELS, &CutSampling::default().with_refinement(true))?;

        let grid = oracle_grid(&fvec, 201)?;
        let (lo, hi) = (out.support().lo(), out.support().hi());
        let edges: Vec<f64> = (0..=200).map(|k| lo + (hi - lo) * k as f64 / 200.0).collect();
        let samples = extend_oracle(&g, &grid, &edges)?;

        println!("{} interaction: z1^2 - z2", mode.label());
        for (alpha, cut) in out.levels().iter().zip(out.cuts()) {
            let brute = sampled_cut(&samples, *alpha).map_or("-".to_string(), |c| c.to_string());
            println!("  alpha {alpha:.2}: optimized {cut}   brute force {brute}");
        }
    }
    Ok(())
}
