//! From a fiber map to fuzzy moments: synthesize a micrograph stand-in,
//! coarsen it into element moduli, compute station moments of the
//! compliance and fit one membership function per moment.

use fsuq::data::{
    build_moment_vector, fit_moment_memberships, harmonic_coarsen, station_moments, synthesize_fiber_map, A_FIBER,
    A_MATRIX, DEFAULT_BINS, DEFAULT_FIBER_RADIUS_PX, ELEMENT_PX,
};
use fsuq::Result;

fn main() -> Result<()> {
    let map = synthesize_fiber_map(5, 1700, 500, 0.63, DEFAULT_FIBER_RADIUS_PX)?;
    println!("synthetic map {}x{}, fiber fraction {:.4}", map.width(), map.height(), map.occupancy_fraction());

    let ensemble = harmonic_coarsen(&map, ELEMENT_PX, A_FIBER, A_MATRIX)?;
    println!("{} bars x {} stations; first element a = {:.3} GPa", ensemble.bars(), ensemble.stations(), ensemble.value(0, 0));

    let moments = station_moments(&ensemble)?;
    let fitted = fit_moment_memberships(&moments, DEFAULT_BINS)?;
    for (name, f) in ["mean", "std", "skewness", "excess kurtosis"].iter().zip(&fitted) {
        let vertices: Vec<String> = f.variable.cuts().iter().map(|c| format!("{:.4}", c.lo())).chain(
            f.variable.cuts().iter().rev().map(|c| format!("{:.4}", c.hi())),
        ).collect();
        println!("{name:>16}: <{}>", vertices.join(", "));
    }
    let vector = build_moment_vector(&fitted.iter().map(|f| f.variable.clone()).collect::<Vec<_>>())?;
    println!("moment vector interaction: {}", vector.mode().label());
    Ok(())
}
