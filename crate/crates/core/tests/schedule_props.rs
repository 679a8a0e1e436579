use dsubgrad::schedule::{per_agent_alpha, validate_assumption7, StepSchedule};
use proptest::prelude::*;

fn partial_sum(s: &StepSchedule, n: usize) -> f64 {
    (0..n).map(|k| s.alpha(k)).sum()
}

fn general_polynomial() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.01..10.0, 1.0..10.0, 0.05..=1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn valid_schedules_stay_positive((a, k0, p) in general_polynomial(), ks in prop::collection::vec(0usize..=1_000_000, 64)) {
        for s in [StepSchedule::polynomial(a, k0, p), StepSchedule::LogPolynomial { a, k0 }] {
            prop_assert!(validate_assumption7(&s).passed);
            for &k in &ks {
                prop_assert!(s.alpha(k) > 0.0);
            }
        }
    }

    #[test]
    fn steps_vanish((a, k0, p) in (0.01..10.0, 1.0..10.0, 0.5..=1.0)) {
        let s = StepSchedule::polynomial(a, k0, p);
        prop_assert!(s.alpha(1_000_000) < s.alpha(100));
        prop_assert!(s.alpha(1_000_000) < 1e-2 * a);
    }

    #[test]
    fn per_agent_ratio_tends_to_one(d in prop::collection::vec(-0.999..=1.0, 1..6), (a, k0, p) in general_polynomial()) {
        let s = StepSchedule::PerAgentPerturbed { base: Box::new(StepSchedule::polynomial(a, k0, p)), d: d.clone(), r: 1.0 };
        for i in 0..d.len() {
            let ratio = per_agent_alpha(&s, i, 10_000).unwrap() / s.alpha(10_000);
            prop_assert!((ratio - 1.0).abs() < 1e-3);
        }
        prop_assert!(per_agent_alpha(&s, d.len(), 0).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Partial sums keep growing: 10x from 10^4 to 10^6 terms when p <= 1/2,
    /// and at least the integral of the tail when 1/2 < p <= 1.
    #[test]
    fn partial_sums_keep_growing((a, k0, p) in general_polynomial()) {
        let s = StepSchedule::polynomial(a, k0, p);
        let (short, long) = (partial_sum(&s, 10_000), partial_sum(&s, 1_000_000));
        if p <= 0.5 {
            prop_assert!(long > 10.0 * short, "{long} vs {short}");
        }
        let (lo, hi) = (10_000.0 + k0, 1_000_000.0 + k0);
        let tail = if p == 1.0 { a * (hi / lo).ln() } else { a * (hi.powf(1.0 - p) - lo.powf(1.0 - p)) / (1.0 - p) };
        prop_assert!(long - short >= tail * (1.0 - 1e-9), "{} < {tail}", long - short);
    }
}
