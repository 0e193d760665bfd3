mod common;

use proptest::prelude::*;

use vexpred::calibration;
use vexpred::features::SupervisedSet;
use vexpred::models::{self, ModelKind, ModelSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn labels_use_strict_inequalities(values in common::voltages(60), a in common::bound_value(), b in common::bound_value()) {
        common::labeling_strict(&values, a, b)?;
    }

    #[test]
    fn tighter_bounds_never_add_events(
        values in common::voltages(60),
        lo in 900u32..1000,
        up in 1000u32..1100,
        delta in 0u32..50,
    ) {
        common::labeling_monotone(&values, f64::from(lo) / 1000.0, f64::from(up) / 1000.0 + 1e-3, f64::from(delta) / 1000.0)?;
    }

    #[test]
    fn window_layout_and_example_count(values in common::voltages(40), spec in common::feature_spec(), upper in common::bound_value()) {
        common::features_laws(&values, spec, upper)?;
    }

    #[test]
    fn metric_ranges_and_symmetries(cm in common::confusion_matrix()) {
        common::metrics_laws(cm)?;
    }

    #[test]
    fn roc_is_monotone_and_bounded(seed in any::<u64>(), step in prop::sample::select(vec![0.01, 0.05, 0.1, 0.25])) {
        let mut rng = common::rng(seed);
        let (scores, truth) = common::random_scored(&mut rng, seed % 2 == 0);
        let curve = calibration::roc(&scores, &truth, step).unwrap();
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        prop_assert_eq!((last.beta, last.fpr, last.tpr), (0.0, 1.0, 1.0));
        for w in curve.points.windows(2) {
            prop_assert!(w[1].beta < w[0].beta);
            prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
        prop_assert!((0.0..=1.0).contains(&curve.auc));
        let cal = calibration::select_beta(&scores, &truth, step).unwrap();
        let best = calibration::gm_curve(&scores, &truth, step).unwrap().iter().map(|p| p.1).fold(0.0, f64::max);
        prop_assert_eq!(cal.gm_at_star, best);
    }
}

fn small_set() -> impl Strategy<Value = SupervisedSet> {
    (1usize..4, 2usize..60).prop_flat_map(|(dim, n)| {
        (
            prop::collection::vec(prop::collection::vec(0.9f64..1.1, dim..=dim), n..=n),
            prop::collection::vec(0u8..=1, n..=n),
        )
            .prop_map(|(rows, targets)| SupervisedSet::from_rows(1, &rows, targets).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_are_probabilities_and_deterministic(data in small_set(), seed in any::<u64>(), probe in prop::collection::vec(0.8f64..1.2, 3)) {
        for kind in ModelKind::ALL {
            if kind == ModelKind::Dtmc && data.dim() < 2 {
                continue;
            }
            let spec = ModelSpec::with_defaults(kind, seed);
            let a = models::train(&spec, &data).unwrap();
            let b = models::train(&spec, &data).unwrap();
            prop_assert_eq!(&a, &b);
            let x = &probe[..data.dim()];
            let s = a.score(x).unwrap();
            prop_assert!((0.0..=1.0).contains(&s), "{kind}: {s}");
            for i in 0..data.len() {
                let s = a.score(data.input(i)).unwrap();
                prop_assert!((0.0..=1.0).contains(&s));
            }
            let restored = models::TrainedModel::from_json(&a.to_json().unwrap()).unwrap();
            prop_assert_eq!(restored.score(x).unwrap(), s);
        }
    }
}
