//! Joint α-cuts of a fuzzy vector: a box when the components do not
//! interact, a polygonal curve when they are fully interactive.

use fsuq::{FuzzyVariable, FuzzyVector, JointAlphaCut, Result};

fn main() -> Result<()> {
    let z = vec![FuzzyVariable::triangular(1.00, 1.06, 1.20)?, FuzzyVariable::triangular(0.10, 0.13, 0.20)?];
    let non = FuzzyVector::non_interactive(z.clone())?;
    let full = FuzzyVector::fully_interactive(z)?;

    for alpha in [0.0, 0.5, 1.0] {
        println!("alpha = {alpha}");
        match non.joint_alpha_cut(alpha)? {
            JointAlphaCut::Box { intervals } => {
                println!("  non-interactive box: {} x {}", intervals[0], intervals[1]);
            }
            JointAlphaCut::Polyline(_) => unreachable!(),
        }
        if let JointAlphaCut::Polyline(chain) = full.joint_alpha_cut(alpha)? {
            println!("  fully interactive chain, length {:.4}:", chain.total_length());
            for v in chain.vertices() {
                println!("    ({:.4}, {:.4})", v[0], v[1]);
            }
        }
    }

    for point in [[1.03, 0.115], [1.03, 0.165], [1.13, 0.165]] {
        println!(
            "membership of {point:?}: non {:.3}, full {:.3}",
            non.joint_membership(&point)?,
            full.joint_membership(&point)?
        );
    }
    Ok(())
}
