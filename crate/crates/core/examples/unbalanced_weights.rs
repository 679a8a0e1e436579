//! On an unbalanced graph the agents settle on the minimizer of the
//! q-weighted objective rather than the plain sum.
//!
//! Agent 1 minimizes `(x - 1)^2`, agent 2 minimizes `(x + 1)^2`. Agent 2
//! copies agent 1 every round, so agent 1 carries twice the weight.

use dsubgrad::convex::{BoxBounds, Objective, ProblemSpec};
use dsubgrad::engine::weighted_average_recursion_check;
use dsubgrad::graph::compute_left_eigenvector;
use dsubgrad::{run, GraphSequence, Result, RunConfig, StepSchedule, WeightMatrix};

fn main() -> Result<()> {
    let sq = |c: f64| Objective::Quadratic { p: vec![vec![2.0]], c: vec![-2.0 * c], b: c * c };
    let spec = ProblemSpec::unconstrained(1, vec![sq(1.0), sq(-1.0)])?.with_sampling_box(BoxBounds::cube(1, -2.0, 2.0))?;
    let graph = GraphSequence::fixed(WeightMatrix::from_rows(&[vec![0.5, 0.5], vec![1.0, 0.0]])?, 0.1)?;
    let q = compute_left_eigenvector(&graph)?;
    println!("q = {:?}", q.as_slice());

    let cfg = RunConfig::new(spec, graph, StepSchedule::inverse_sqrt()).rounds(20_000);
    let trace = run(&cfg, None)?;
    println!("y(K) = {:.6} (weighted minimizer 1/3, unweighted minimizer 0)", trace.summary.final_y[0]);
    println!("recursion residual {:.1e}", weighted_average_recursion_check(&trace, &q)?);
    Ok(())
}
