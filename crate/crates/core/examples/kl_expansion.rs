//! Karhunen–Loève expansion of a Gaussian field with covariance
//! `exp(-|x1 - x2|^p / (2 ℓ²))`, truncation by retained variance and sampling.

use fsuq::field::{midpoint_grid, CovarianceSpec, KlExpansion, Sampler};
use fsuq::Result;

fn main() -> Result<()> {
    let spec = CovarianceSpec::fiber_composite();
    for (length, cells) in [(1000.0, 100), (1700.0, 170)] {
        let kl = KlExpansion::decompose(&midpoint_grid(length, cells), &spec)?;
        let m = kl.truncation_order(0.9)?;
        let kept: f64 = kl.eigenvalues()[..m].iter().sum::<f64>() / kl.trace();
        println!("{cells} midpoints over {length} um: m = {m} terms keep {kept:.4} of the variance");
    }

    let kl = KlExpansion::decompose(&midpoint_grid(1700.0, 170), &spec)?;
    let m = kl.truncation_order(0.9)?;
    let fields = kl.sample_fields(&mut Sampler::new(3), m, 2000)?;
    let var0: f64 = fields.rows().map(|r| r[0] * r[0]).sum::<f64>() / fields.len() as f64;
    println!("pointwise variance at x_1: sampled {var0:.3}, expansion {:.3}", kl.pointwise_variance(m)[0]);
    let first = fields.row(0);
    println!("first realization, every 17th cell: {:?}", first.iter().step_by(17).map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    Ok(())
}
