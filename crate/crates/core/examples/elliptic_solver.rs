//! The 1D problem `-(a u')' = 0`, `u(0) = 0`, `a u'(L) = 1` by midpoint
//! quadrature of `u(x) = ∫₀^x a⁻¹`: second-order convergence and the
//! closed-form limit for `a = (2 + sin(2πx/L)) e^{z1}`.

use fsuq::solver::{solve_displacement, LognormalCoefficient, SolveConfig};
use fsuq::Result;

fn main() -> Result<()> {
    let z = [1.06, 0.13];
    let exact = 2.0 / 3f64.sqrt() * (-1.06f64).exp();
    let mut previous: Option<f64> = None;
    for cells in [25, 50, 100, 200, 400] {
        let config = SolveConfig::new(2.0, cells)?;
        // y = 0: the coefficient is deterministic
        let u = solve_displacement(&LognormalCoefficient, 1.37, &[0.0], &z, &config)?;
        let end = solve_displacement(&LognormalCoefficient, 2.0, &[0.0], &z, &config)?;
        let note = previous.map_or(String::new(), |p: f64| format!("  (change {:.2e})", (u - p).abs()));
        println!("N_h = {cells:4}: u(1.37) = {u:.10}{note}   u(L) - exact = {:.2e}", end - exact);
        previous = Some(u);
    }
    Ok(())
}
