use dsubgrad::graph::{
    check_balanced, check_joint_strong_connectivity, compute_left_eigenvector, make_graph_sequence,
    weights_from_edges, GraphConfig, GraphSequence, Topology, WeightScheme, DEFAULT_ETA,
};
use proptest::prelude::*;

fn edge(n: usize) -> impl Strategy<Value = [usize; 2]> {
    (0..n, 0..n).prop_filter("no loops", |(a, b)| a != b).prop_map(|(a, b)| [a, b])
}

fn random_switching() -> impl Strategy<Value = GraphConfig> {
    (2usize..=7).prop_flat_map(|n| {
        (prop::collection::vec(edge(n), 0..10), 0.0..=1.0, any::<u64>(), 1usize..=5).prop_map(
            move |(edge_pool, edge_probability, seed, window)| {
                let mut cfg = GraphConfig::new(Topology::RandomSwitching {
                    n,
                    edge_pool,
                    edge_probability,
                    seed,
                    weights: WeightScheme::Metropolis,
                });
                cfg.window = Some(window);
                cfg
            },
        )
    })
}

fn assert_matrix_invariants(seq: &GraphSequence, k: usize) -> Result<(), TestCaseError> {
    let a = seq.matrix(k);
    let n = a.n();
    for i in 0..n {
        let row: f64 = (0..n).map(|j| a.get(i, j)).sum();
        prop_assert!((row - 1.0).abs() < 1e-12, "row {i} of A({k}) sums to {row}");
        prop_assert!(a.get(i, i) > 0.0, "zero diagonal in A({k})");
        for j in 0..n {
            let w = a.get(i, j);
            prop_assert!(w == 0.0 || w >= seq.eta(), "a_{i}{j}({k}) = {w} below eta");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn random_switching_invariants(cfg in random_switching(), ks in prop::collection::vec(0usize..=10_000, 200)) {
        let seq = make_graph_sequence(&cfg).unwrap();
        let twin = make_graph_sequence(&cfg).unwrap();
        prop_assert_eq!(seq.eta(), DEFAULT_ETA);
        prop_assert!(seq.is_balanced());
        for &k in &ks {
            assert_matrix_invariants(&seq, k)?;
            prop_assert!(check_balanced(&seq.matrix(k)));
            let (a, b) = (seq.matrix(k), twin.matrix(k));
            prop_assert_eq!(a.as_dmatrix(), b.as_dmatrix());
        }
        let b = seq.window();
        for p in 0..20 {
            prop_assert!(check_joint_strong_connectivity(&seq, p * b, b));
        }
    }

    #[test]
    fn periodic_metropolis_is_doubly_stochastic(
        (n, rounds) in (2usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(prop::collection::vec(edge(n), 0..6), 1..5)))
    ) {
        let mut cfg = GraphConfig::new(Topology::Periodic { n, rounds, directed: false, weights: WeightScheme::Metropolis });
        cfg.eta = Some(1.0 / n as f64);
        let seq = make_graph_sequence(&cfg).unwrap();
        for k in 0..10 {
            assert_matrix_invariants(&seq, k)?;
            let a = seq.matrix(k);
            for j in 0..n {
                let col: f64 = (0..n).map(|i| a.get(i, j)).sum();
                prop_assert!((col - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn left_eigenvector_of_fixed_digraph(
        (n, extra) in (2usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(edge(n), 0..8)))
    ) {
        // a directed ring keeps the graph strongly connected
        let mut edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
        edges.extend(extra);
        let a = weights_from_edges(n, &edges, true, WeightScheme::Uniform).unwrap();
        let seq = GraphSequence::fixed(a, 1.0 / n as f64).unwrap();
        let q = compute_left_eigenvector(&seq).unwrap();
        prop_assert!(q.as_slice().iter().all(|&x| x > 0.0));
        prop_assert!((q.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..100 {
            prop_assert!(q.residual(&seq.matrix(k)) < 1e-9);
        }
    }
}

#[test]
fn balanced_preset_graph_has_uniform_q() {
    let mut cfg = GraphConfig::new(Topology::Periodic {
        n: 5,
        rounds: vec![vec![[0, 1], [2, 3]], vec![[1, 2], [3, 4]], vec![[4, 0]]],
        directed: false,
        weights: WeightScheme::Metropolis,
    });
    cfg.balanced = Some(true);
    let seq = make_graph_sequence(&cfg).unwrap();
    let q = compute_left_eigenvector(&seq).unwrap();
    assert_eq!(q.as_slice(), &[0.2; 5]);
    assert!((0..100).all(|k| q.residual(&seq.matrix(k)) < 1e-9));
}
