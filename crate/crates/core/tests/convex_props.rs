use dsubgrad::convex::{BoxBounds, ConstraintSet};
use dsubgrad::linalg::dist;
use proptest::prelude::*;

fn planar_set() -> impl Strategy<Value = ConstraintSet> {
    let corner = prop::collection::vec(-1.5..1.5, 2);
    let size = prop::collection::vec(0.05..1.5, 2);
    let boxed = (corner.clone(), size.clone()).prop_map(|(lo, s)| ConstraintSet::Box {
        hi: lo.iter().zip(&s).map(|(l, s)| l + s).collect(),
        lo,
    });
    let ball = (prop::collection::vec(-1.0..1.0, 2), 0.1..1.0).prop_map(|(center, radius)| ConstraintSet::Ball { center, radius });
    let halfspace = (corner, size, prop::collection::vec(-1.0..1.0, 2), 0.0..1.0)
        .prop_filter("nonzero normal", |(_, _, a, _): &(Vec<f64>, Vec<f64>, Vec<f64>, f64)| a[0].abs() + a[1].abs() > 0.1)
        .prop_map(|(lo, s, a, t)| {
            let hi: Vec<f64> = lo.iter().zip(&s).map(|(l, s)| l + s).collect();
            let mid = BoxBounds::new(lo.clone(), hi.clone()).midpoint();
            let beta = a[0] * mid[0] + a[1] * mid[1] + t;
            ConstraintSet::HalfspaceBox { lo, hi, a, beta }
        });
    prop_oneof![boxed, ball, halfspace]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    /// The projection is at least as close as every feasible grid point, up
    /// to the grid spacing.
    #[test]
    fn projection_beats_feasible_grid(set in planar_set(), x in prop::collection::vec(-3.0..3.0, 2)) {
        let h = 0.02;
        let b = set.bounding_box().unwrap();
        let p = set.project(&x).unwrap();
        let nx = ((b.hi[0] - b.lo[0]) / h).ceil() as usize;
        let ny = ((b.hi[1] - b.lo[1]) / h).ceil() as usize;
        let mut best = f64::INFINITY;
        for i in 0..=nx {
            for j in 0..=ny {
                let z = [(b.lo[0] + i as f64 * h).min(b.hi[0]), (b.lo[1] + j as f64 * h).min(b.hi[1])];
                if set.contains(&z, 0.0).unwrap() {
                    best = best.min(dist(&x, &z));
                }
            }
        }
        prop_assert!(best.is_finite(), "no feasible grid point in {set:?}");
        prop_assert!(dist(&x, &p) <= best + h, "{set:?}: projection at {} but grid reaches {best}", dist(&x, &p));
        prop_assert!(set.contains(&p, 1e-9).unwrap());
    }
}

#[test]
fn intersection_of_boxes_projects_onto_the_common_box() {
    let set = ConstraintSet::IntersectionOfBoxes {
        boxes: vec![BoxBounds::cube(2, -1.0, 1.0), BoxBounds::new(vec![0.0, -2.0], vec![2.0, 0.5])],
    };
    assert_eq!(set.project(&[-3.0, 3.0]).unwrap(), vec![0.0, 0.5]);
    assert!(set.contains(&[0.5, 0.0], 0.0).unwrap());
    assert!(!set.contains(&[-0.5, 0.0], 1e-9).unwrap());
}
