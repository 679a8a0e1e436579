//! Euclidean projections onto the supported constraint sets.

use dsubgrad::convex::{BoxBounds, ConstraintSet, Intersection};
use dsubgrad::linalg::dist;
use dsubgrad::Result;

fn main() -> Result<()> {
    let x = [2.0, -1.5];
    let sets = [
        ConstraintSet::Box { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] },
        ConstraintSet::Ball { center: vec![0.0, 0.0], radius: 1.0 },
        ConstraintSet::HalfspaceBox { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0], a: vec![1.0, 1.0], beta: 0.0 },
        ConstraintSet::IntersectionOfBoxes {
            boxes: vec![BoxBounds::cube(2, -1.0, 1.0), BoxBounds::new(vec![0.0, -2.0], vec![2.0, 0.5])],
        },
    ];
    for set in &sets {
        let p = set.project(&x)?;
        // projecting twice changes nothing
        let again = set.project(&p)?;
        println!("{set:?}\n  P(x) = {p:.6?}, dist {:.6}, idempotence error {:.1e}", dist(&x, &p), dist(&p, &again));
    }

    // Dykstra on a ball intersected with a halfspace-box
    let both = Intersection::of(&sets[1..3]);
    let p = both.project(&x)?;
    println!("ball ∩ halfspace-box: P(x) = {p:.6?}, inside both: {}", both.contains(&p, 1e-9));
    Ok(())
}
