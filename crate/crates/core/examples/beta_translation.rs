//! Four-parameter beta laws from moments and the translation map
//! `b = Ψ⁻¹(Φ(g))` that turns a Gaussian value into a beta-distributed one.

use fsuq::translation::{fit_beta_from_moments, BetaParams, MomentSet};
use fsuq::{Error, Result};

fn main() -> Result<()> {
    let b22 = BetaParams::new(2.0, 2.0, 0.0, 1.0)?;
    let refit = fit_beta_from_moments(&b22.moments())?;
    println!("beta(2,2) refit: p = {:.10}, q = {:.10}, [{:.10}, {:.10}]", refit.shape_p, refit.shape_q, refit.lo, refit.hi);
    println!("translate(1.0) under beta(2,2) = {:.6}", b22.translate(1.0));

    let modal = MomentSet::new(0.1330, 0.0285, 1.00, 0.50);
    let params = fit_beta_from_moments(&modal)?;
    let translator = params.translator();
    println!("\nmodal composite compliance law: {params:?}");
    for g in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        println!("  g = {g:5.1} -> b = {:.6} (direct {:.6})", translator.translate(g), params.translate(g));
    }

    match fit_beta_from_moments(&MomentSet::new(0.13, 0.02, 1.0, -1.5)) {
        Err(Error::Infeasible { suggested_excess_kurtosis, .. }) => {
            let (lo, hi) = MomentSet::beta_kurtosis_range(1.0);
            println!("\nkurtosis -1.5 at skewness 1 is infeasible; range ({lo}, {hi}), try {suggested_excess_kurtosis:.4}");
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
