use dsubgrad::convex::{AffinePiece, BoxBounds, ConstraintSet, Objective, ProblemSpec};
use dsubgrad::engine::{run, weighted_average_recursion_check, Init, RunConfig};
use dsubgrad::graph::{make_graph_sequence, GraphConfig, GraphSequence, LeftEigenvector, Topology, WeightMatrix, WeightScheme};
use dsubgrad::linalg::dist;
use dsubgrad::oracle::centralized_path;
use dsubgrad::schedule::StepSchedule;
use proptest::prelude::*;

fn objective(m: usize) -> impl Strategy<Value = Objective> {
    let affine = (prop::collection::vec(-2.0..2.0, m), -1.0..1.0).prop_map(|(c, b)| Objective::Affine { c, b });
    let quadratic = (prop::collection::vec(0.1..2.0, m), prop::collection::vec(-2.0..2.0, m)).prop_map(move |(diag, c)| {
        let p = (0..m).map(|i| (0..m).map(|j| if i == j { diag[i] } else { 0.0 }).collect()).collect();
        Objective::Quadratic { p, c, b: 0.0 }
    });
    let l1 = (prop::collection::vec(0.0..2.0, m), prop::collection::vec(-1.0..1.0, m))
        .prop_map(|(w, center)| Objective::L1Shift { w, center });
    let max_affine = prop::collection::vec((prop::collection::vec(-2.0..2.0, m), -1.0..1.0), 1..4).prop_map(|ps| Objective::MaxAffine {
        pieces: ps.into_iter().map(|(c, b)| AffinePiece { c, b }).collect(),
    });
    prop_oneof![affine, quadratic, l1, max_affine]
}

/// Boxes that all contain a shared random point.
fn boxes(n: usize, m: usize) -> impl Strategy<Value = Vec<ConstraintSet>> {
    prop::collection::vec(-1.0..1.0, m).prop_flat_map(move |c| {
        prop::collection::vec((prop::collection::vec(0.0..1.5, m), prop::collection::vec(0.0..1.5, m)), n).prop_map(move |ws| {
            ws.into_iter()
                .map(|(a, b)| ConstraintSet::Box {
                    lo: c.iter().zip(&a).map(|(c, a)| c - a).collect(),
                    hi: c.iter().zip(&b).map(|(c, b)| c + b).collect(),
                })
                .collect()
        })
    })
}

fn ring(n: usize) -> GraphSequence {
    let mut cfg = GraphConfig::new(Topology::Ring { n, weights: WeightScheme::Metropolis });
    cfg.eta = Some(0.2);
    make_graph_sequence(&cfg).unwrap()
}

fn constrained_problem() -> impl Strategy<Value = ProblemSpec> {
    (2usize..=4, 1usize..=2).prop_flat_map(|(n, m)| {
        (prop::collection::vec(objective(m), n), boxes(n, m))
            .prop_map(move |(objectives, sets)| ProblemSpec::new(m, objectives, sets).unwrap())
    })
}

fn unconstrained_problem() -> impl Strategy<Value = ProblemSpec> {
    (2usize..=4, 1usize..=2).prop_flat_map(|(n, m)| {
        prop::collection::vec(objective(m), n).prop_map(move |objectives| {
            ProblemSpec::unconstrained(m, objectives)
                .unwrap()
                .with_sampling_box(BoxBounds::cube(m, -3.0, 3.0))
                .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn estimates_stay_in_their_sets(spec in constrained_problem(), seed in any::<u64>()) {
        let n = spec.n();
        let cfg = RunConfig::new(spec.clone(), ring(n), StepSchedule::inverse_sqrt()).rounds(300).seed(seed);
        let trace = run(&cfg, None).unwrap();
        prop_assert_eq!(trace.records.len(), 301);
        for r in &trace.records {
            for (x, set) in r.x.iter().zip(spec.constraints()) {
                prop_assert!(set.contains(x, 1e-9).unwrap(), "round {}: {x:?} outside {set:?}", r.k);
            }
        }
        prop_assert!(trace.summary.max_local_infeasibility < 1e-9);
    }

    #[test]
    fn unconstrained_recursion_is_exact(spec in unconstrained_problem(), seed in any::<u64>()) {
        let n = spec.n();
        let cfg = RunConfig::new(spec, ring(n), StepSchedule::inverse_sqrt()).rounds(500).seed(seed);
        let trace = run(&cfg, None).unwrap();
        prop_assert!(weighted_average_recursion_check(&trace, &trace.q).unwrap() < 1e-10);
    }

    #[test]
    fn same_config_same_trace(spec in constrained_problem(), seed in any::<u64>(), graph_seed in any::<u64>()) {
        let n = spec.n();
        let mut g = GraphConfig::new(Topology::RandomSwitching {
            n,
            edge_pool: vec![[0, 1], [0, n - 1]],
            edge_probability: 0.5,
            seed: graph_seed,
            weights: WeightScheme::Metropolis,
        });
        g.window = Some(3);
        let cfg = RunConfig::new(spec, make_graph_sequence(&g).unwrap(), StepSchedule::inverse_sqrt())
            .rounds(200)
            .seed(seed);
        let a = run(&cfg, None).unwrap();
        let b = run(&cfg, None).unwrap();
        prop_assert_eq!(a.records, b.records);
    }

    /// n = 1 with A = [1] is centralized projected subgradient descent.
    #[test]
    fn single_agent_matches_centralized_solver(
        (spec, z0) in (1usize..=2).prop_flat_map(|m| (objective(m), boxes(1, m))).prop_flat_map(|(f, sets)| {
            let b = match &sets[0] { ConstraintSet::Box { lo, hi } => BoxBounds::new(lo.clone(), hi.clone()), _ => unreachable!() };
            let m = b.lo.len();
            let z0 = b.lo.iter().zip(&b.hi).map(|(l, h)| (*l, *h)).collect::<Vec<_>>();
            (Just(ProblemSpec::new(m, vec![f], sets).unwrap()), z0.into_iter().map(|(l, h)| if l < h { (l..h).boxed() } else { Just(l).boxed() }).collect::<Vec<_>>())
        }),
        p in 0.3..=1.0f64,
    ) {
        let schedule = StepSchedule::polynomial(0.7, 1.0, p);
        let graph = GraphSequence::fixed(WeightMatrix::identity(1), 0.1).unwrap();
        let cfg = RunConfig::new(spec.clone(), graph, schedule.clone())
            .rounds(400)
            .init(Init::Explicit { points: vec![z0.clone()] });
        let trace = run(&cfg, None).unwrap();
        let path = centralized_path(&spec, &LeftEigenvector::uniform(1), z0, |k| schedule.alpha(k), 400).unwrap();
        for (r, z) in trace.records.iter().zip(&path) {
            prop_assert!(dist(&r.x[0], z) < 1e-12, "round {}: {:?} vs {z:?}", r.k, r.x[0]);
        }
    }

    /// Constant objectives on a balanced graph leave the average untouched.
    #[test]
    fn balanced_average_is_conserved(n in 2usize..=6, m in 1usize..=3, offsets in prop::collection::vec(-5.0..5.0, 6), seed in any::<u64>()) {
        let objectives = (0..n).map(|i| Objective::Affine { c: vec![0.0; m], b: offsets[i] }).collect();
        let spec = ProblemSpec::unconstrained(m, objectives).unwrap().with_sampling_box(BoxBounds::cube(m, -1.0, 1.0)).unwrap();
        let cfg = RunConfig::new(spec, ring(n), StepSchedule::inverse_sqrt()).rounds(300).seed(seed);
        let trace = run(&cfg, None).unwrap();
        let y0 = &trace.records[0].y;
        for r in &trace.records {
            prop_assert!(dist(&r.y, y0) < 1e-12, "round {}", r.k);
        }
    }
}

/// Far from the optimum with small steps the average moves toward `x*`
/// every round.
#[test]
fn distance_to_optimum_decreases_while_gap_dominates() {
    let sq = |c: f64| Objective::Quadratic { p: vec![vec![2.0]], c: vec![-2.0 * c], b: c * c };
    let spec = ProblemSpec::unconstrained(1, vec![sq(1.0), sq(-1.0)])
        .unwrap()
        .with_sampling_box(BoxBounds::cube(1, -2.0, 2.0))
        .unwrap();
    let g = 6.0; // sup |f_i'| on [-2, 2]
    let (x_star, f_star) = (0.0, 1.0);
    let graph = GraphSequence::fixed(WeightMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(), 0.1).unwrap();
    let schedule = StepSchedule::polynomial(1e-3, 1.0, 0.5);
    let rounds = 100_000;
    let cfg = RunConfig::new(spec.clone(), graph, schedule.clone())
        .rounds(rounds)
        .init(Init::Explicit { points: vec![vec![2.0], vec![1.5]] });
    let trace = run(&cfg, None).unwrap();
    let q = [0.5, 0.5];
    let mut checked = 0;
    for pair in trace.records[rounds - rounds / 10..].windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        if spec.weighted_value(&q, &cur.y) - f_star > 10.0 * schedule.alpha(cur.k) * g * g {
            checked += 1;
            assert!((next.y[0] - x_star).abs() <= (cur.y[0] - x_star).abs() + 1e-12, "round {}", cur.k);
        }
    }
    assert!(checked > 0, "no round in the final tenth is far enough from the optimum");
}
