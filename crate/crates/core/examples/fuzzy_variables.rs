//! Fuzzy variables as α-cut tables: construction, cuts, membership and CSV.

use fsuq::fuzzy::DEFAULT_LEVELS;
use fsuq::{FuzzyVariable, Result};

fn main() -> Result<()> {
    let z1 = FuzzyVariable::triangular(1.00, 1.06, 1.20)?;
    println!("support {}  core {}", z1.support(), z1.core());
    for alpha in [0.0, 0.3, 0.5, 0.9, 1.0] {
        println!("alpha {alpha:.2}: {}", z1.alpha_cut(alpha)?);
    }
    for x in [1.00, 1.03, 1.06, 1.13, 1.25] {
        println!("mu({x}) = {:.4}", z1.membership(x));
    }

    // a decagon: five nested cuts given by ten ascending vertices
    let kurtosis = FuzzyVariable::decagonal(&[-1.00, -0.55, -0.20, 0.0, 0.50, 1.00, 1.50, 2.00, 3.30, 4.50])?;
    println!("\ndecagonal cut table:\n{}", kurtosis.to_cut_csv());
    assert!(kurtosis.validate().is_empty());

    let reread = FuzzyVariable::from_cut_csv(&kurtosis.to_cut_csv())?;
    assert_eq!(reread, kurtosis);
    println!("crisp 2.5 is crisp: {}", FuzzyVariable::crisp(2.5)?.is_crisp());
    println!("levels used by polygonal constructors: {DEFAULT_LEVELS:?}");
    Ok(())
}
