use dsubgrad::convex::{AffinePiece, BoxBounds, ConstraintSet, Objective, ProblemSpec};
use dsubgrad::experiment;
use dsubgrad::graph::LeftEigenvector;
use dsubgrad::oracle::{solve_centralized, solve_grid, OracleSolution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problems() -> Vec<(ProblemSpec, LeftEigenvector)> {
    let uniform2 = LeftEigenvector::uniform(2);
    let sq = |c: f64| Objective::Quadratic { p: vec![vec![2.0]], c: vec![-2.0 * c], b: c * c };
    let mut out = vec![
        (
            ProblemSpec::unconstrained(1, vec![sq(1.0), sq(-1.0)])
                .unwrap()
                .with_sampling_box(BoxBounds::cube(1, -2.0, 2.0))
                .unwrap(),
            LeftEigenvector::from_weights(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
        ),
        (
            ProblemSpec::new(
                2,
                vec![
                    Objective::L1Shift { w: vec![1.0, 2.0], center: vec![0.9, -0.4] },
                    Objective::MaxAffine {
                        pieces: vec![
                            AffinePiece { c: vec![1.0, 0.0], b: 0.0 },
                            AffinePiece { c: vec![-1.0, 1.0], b: -0.3 },
                        ],
                    },
                ],
                vec![
                    ConstraintSet::Ball { center: vec![0.0, 0.0], radius: 1.0 },
                    ConstraintSet::HalfspaceBox { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0], a: vec![1.0, 1.0], beta: 0.5 },
                ],
            )
            .unwrap(),
            uniform2,
        ),
    ];
    for name in ["thm2_boxes_sqrt", "thm1_balanced_sqrt"] {
        let cfg = experiment::preset(name).unwrap();
        let spec = cfg.problem_spec().unwrap();
        let q = LeftEigenvector::uniform(spec.n());
        out.push((spec, q));
    }
    out
}

fn g_bound(spec: &ProblemSpec) -> f64 {
    spec.resolved_g().unwrap()
}

#[test]
fn grid_and_centralized_agree() {
    let resolution = 2e-3;
    for (spec, q) in problems() {
        let grid = solve_grid(&spec, &q, resolution).unwrap();
        let cent = solve_centralized(&spec, &q, 200_000).unwrap();
        let slack = grid.certified_gap + cent.certified_gap + g_bound(&spec) * resolution;
        assert!(
            (grid.f_star - cent.f_star).abs() <= slack,
            "grid {} vs centralized {} (slack {slack})",
            grid.f_star,
            cent.f_star
        );
    }
}

fn feasible_samples(spec: &ProblemSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bx = spec.search_box().unwrap();
    let inter = spec.intersection();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = bx.sample(&mut rng);
        if inter.contains(&z, 0.0) {
            out.push(z);
        }
    }
    out
}

fn assert_lower_bound_witness(spec: &ProblemSpec, q: &LeftEigenvector, sol: &OracleSolution) {
    for z in feasible_samples(spec, 1000, 17) {
        let v = spec.weighted_value(q.as_slice(), &z);
        assert!(v >= sol.f_star - sol.certified_gap, "f({z:?}) = {v} below f* = {}", sol.f_star);
    }
}

#[test]
fn f_star_bounds_random_feasible_points_and_x_star_is_feasible() {
    for (spec, q) in problems() {
        for sol in [solve_grid(&spec, &q, 2e-3).unwrap(), solve_centralized(&spec, &q, 50_000).unwrap()] {
            assert_lower_bound_witness(&spec, &q, &sol);
            for set in spec.constraints() {
                assert!(set.distance(&sol.x_star).unwrap() < 1e-9, "{:?} outside {set:?}", sol.x_star);
            }
        }
    }
}
