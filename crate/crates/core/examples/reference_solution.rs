//! Reference minimizers from the grid oracle and the centralized projected
//! subgradient oracle. This problem has a segment of minimizers, so the two
//! agree on `f*` but may report different points.

use dsubgrad::convex::{AffinePiece, ConstraintSet, Objective, ProblemSpec};
use dsubgrad::oracle::{solve_centralized, solve_grid};
use dsubgrad::{LeftEigenvector, Result};

fn main() -> Result<()> {
    let spec = ProblemSpec::new(
        2,
        vec![
            Objective::L1Shift { w: vec![1.0, 2.0], center: vec![0.9, -0.4] },
            Objective::MaxAffine {
                pieces: vec![AffinePiece { c: vec![1.0, 0.0], b: 0.0 }, AffinePiece { c: vec![-1.0, 1.0], b: -0.3 }],
            },
        ],
        vec![
            ConstraintSet::Ball { center: vec![0.0, 0.0], radius: 1.0 },
            ConstraintSet::HalfspaceBox { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0], a: vec![1.0, 1.0], beta: 0.5 },
        ],
    )?;
    let q = LeftEigenvector::uniform(2);
    for sol in [solve_grid(&spec, &q, 1e-3)?, solve_centralized(&spec, &q, 100_000)?] {
        println!("{:?}: x* = {:.5?}, f* = {:.6}, certified gap {:.1e}", sol.method, sol.x_star, sol.f_star, sol.certified_gap);
    }
    Ok(())
}
