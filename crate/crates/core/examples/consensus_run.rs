//! Five agents on a ring agree on the minimizer of the sum of their
//! quadratics.

use dsubgrad::convex::{BoxBounds, Objective, ProblemSpec};
use dsubgrad::graph::{make_graph_sequence, GraphConfig, Topology, WeightScheme};
use dsubgrad::oracle::solve_closed_form;
use dsubgrad::{run, LeftEigenvector, Result, RunConfig, StepSchedule};

fn main() -> Result<()> {
    let centers = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [2.0, 2.0]];
    let objectives = centers.iter().map(|c| Objective::half_squared_distance(c)).collect();
    let spec = ProblemSpec::unconstrained(2, objectives)?
        .with_sampling_box(BoxBounds::cube(2, -3.0, 3.0))?
        .with_unique_minimizer(true);
    let graph = make_graph_sequence(&GraphConfig::new(Topology::Ring { n: 5, weights: WeightScheme::Metropolis }))?;
    let oracle = solve_closed_form(&spec, &LeftEigenvector::uniform(5))?;
    println!("x* = {:?}", oracle.x_star);

    let cfg = RunConfig::new(spec, graph, StepSchedule::inverse_sqrt()).rounds(20_000).record_every(2_000).seed(3);
    let trace = run(&cfg, Some(&oracle))?;
    for r in &trace.records {
        println!(
            "k = {:>5}  diameter {:.3e}  gap {:.3e}  y = {:.4?}",
            r.k,
            r.metrics.consensus_diameter,
            r.metrics.weighted_objective_gap.unwrap_or(f64::NAN),
            r.y
        );
    }
    Ok(())
}
