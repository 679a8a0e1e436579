//! Builds a few communication patterns and runs the graph checks on them.

use dsubgrad::graph::{
    check_balanced, check_joint_strong_connectivity, compute_left_eigenvector, make_graph_sequence,
    validate_row_stochastic, GraphConfig, Topology, WeightScheme,
};
use dsubgrad::Result;

fn main() -> Result<()> {
    let ring = make_graph_sequence(&GraphConfig::new(Topology::Ring { n: 5, weights: WeightScheme::Metropolis }))?;
    let a = ring.matrix(0);
    let report = validate_row_stochastic(a.as_dmatrix())?;
    println!("ring: {report:?}, balanced {}", check_balanced(&a));

    // Each round alone is disconnected, but every 3 consecutive rounds cover the ring.
    let mut periodic = GraphConfig::new(Topology::Periodic {
        n: 5,
        rounds: vec![vec![[0, 1], [2, 3]], vec![[1, 2], [3, 4]], vec![[4, 0]]],
        directed: false,
        weights: WeightScheme::Metropolis,
    });
    periodic.window = Some(3);
    let seq = make_graph_sequence(&periodic)?;
    for k in 0..3 {
        println!("round {k} alone connected: {}", check_joint_strong_connectivity(&seq, k, 1));
    }
    println!("window of 3 connected: {}", check_joint_strong_connectivity(&seq, 0, 3));

    let mut switching = GraphConfig::new(Topology::RandomSwitching {
        n: 6,
        edge_pool: vec![[0, 3], [1, 4], [2, 5]],
        edge_probability: 0.5,
        seed: 11,
        weights: WeightScheme::Metropolis,
    });
    switching.window = Some(4);
    let seq = make_graph_sequence(&switching)?;
    let connected = (0..100).all(|p| check_joint_strong_connectivity(&seq, 4 * p, 4));
    println!("random switching: first 100 windows connected: {connected}");

    let unbalanced = make_graph_sequence(&GraphConfig::new(Topology::Fixed {
        matrix: vec![vec![0.5, 0.5], vec![1.0, 0.0]],
    }))?;
    println!("fixed unbalanced: q = {:?}", compute_left_eigenvector(&unbalanced)?.as_slice());

    let degenerate = make_graph_sequence(&GraphConfig::new(Topology::Fixed {
        matrix: vec![vec![0.5, 0.5], vec![0.01, 0.99]],
    }));
    println!("tiny weight: {}", degenerate.unwrap_err());
    Ok(())
}
