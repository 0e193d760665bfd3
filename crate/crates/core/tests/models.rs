mod common;

use vexpred::features::SupervisedSet;
use vexpred::models::{
    self, CartParams, DecisionTree, DtmcParams, ForestParams, GaussianNaiveBayes, KnnParams, LinearDiscriminant,
    LinearSvm, MarkovScorer, ModelKind, ModelSpec, NaiveBayesParams, NearestNeighbors, RandomForest, SvmParams,
    TrainedModel,
};

fn set(rows: &[[f64; 2]], targets: &[u8]) -> SupervisedSet {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    SupervisedSet::from_rows(1, &rows, targets.to_vec()).unwrap()
}

fn probe_grid() -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for i in 0..=12 {
        for j in 0..=12 {
            out.push([-1.2 + 0.2 * i as f64, -1.2 + 0.2 * j as f64]);
        }
    }
    out
}

fn noisy_linear(seed: u64, n: usize) -> SupervisedSet {
    use rand::Rng;
    let mut rng = common::rng(seed);
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for _ in 0..n {
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let noisy = 0.7 * x[0] - 0.4 * x[1] + 0.3 * (rng.random::<f64>() - 0.5);
        rows.push(x);
        targets.push(u8::from(noisy > 0.0));
    }
    set(&rows, &targets)
}

#[test]
fn knn_three_positive_neighbours() {
    let data = set(
        &[[1.0, 1.0], [1.01, 1.0], [1.0, 1.01], [0.9, 0.9], [0.91, 0.9], [0.9, 0.91]],
        &[1, 1, 1, 0, 0, 0],
    );
    let knn = NearestNeighbors::fit(&data, &KnnParams { k: 3 });
    assert_eq!(knn.score(&[1.0, 1.0]), 1.0);
    assert_eq!(knn.score(&[0.9, 0.9]), 0.0);
}

#[test]
fn knn_with_k_equal_to_n_returns_prior() {
    let data = noisy_linear(3, 97);
    let prior = data.positives() as f64 / data.len() as f64;
    let knn = NearestNeighbors::fit(&data, &KnnParams { k: data.len() });
    for p in probe_grid() {
        assert_eq!(knn.score(&p), prior);
    }
}

#[test]
fn naive_bayes_matches_closed_form_posterior() {
    // Positive class: mean (2, 2), unit ML variances. Negative class: mean
    // (0, 0), unit variances, twice as many members.
    let pos = [[1.0, 1.0], [1.0, 3.0], [3.0, 1.0], [3.0, 3.0]];
    let neg = [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]];
    let mut rows = pos.to_vec();
    rows.extend_from_slice(&neg);
    rows.extend_from_slice(&neg);
    let mut targets = vec![1; 4];
    targets.extend(vec![0; 8]);
    let nb = GaussianNaiveBayes::fit(&set(&rows, &targets), &NaiveBayesParams::default());
    let expected = 1.0 / (1.0 + 2.0 * (-4.0_f64).exp());
    assert!((nb.score(&[2.0, 2.0]) - expected).abs() < 1e-9);
    let at_origin = 1.0 / (1.0 + 2.0 * 4.0_f64.exp());
    assert!((nb.score(&[0.0, 0.0]) - at_origin).abs() < 1e-9);
}

#[test]
fn dtmc_laplace_smoothed_pair_frequency() {
    // State (A, A) is followed by a positive in 3 of its 4 occurrences.
    let a = [1.0, 1.0];
    let b = [1.1, 1.1];
    let data = set(&[a, a, a, a, b, b], &[1, 1, 1, 0, 0, 0]);
    let chain = MarkovScorer::fit(&data, &DtmcParams::default()).unwrap();
    assert_eq!(chain.score(&a), 4.0 / 6.0);
    assert_eq!(chain.score(&b), 1.0 / 4.0);
    // (A, B) never occurred: back off to the training positive ratio.
    assert_eq!(chain.score(&[1.0, 1.1]), 0.5);
}

#[test]
fn dtmc_rejects_single_input_windows() {
    let data = SupervisedSet::from_rows(1, &[vec![1.0], vec![1.1]], vec![0, 1]).unwrap();
    assert!(models::train(&ModelSpec::with_defaults(ModelKind::Dtmc, 0), &data).is_err());
}

#[test]
fn cart_leaf_proportion() {
    let rows = vec![[0.5, 0.5]; 10];
    let data = set(&rows, &[1, 1, 1, 1, 1, 1, 1, 1, 0, 0]);
    let tree = DecisionTree::fit(&data, &CartParams::default());
    assert_eq!(tree.score(&[0.5, 0.5]), 0.8);
}

#[test]
fn single_tree_forest_without_bootstrap_equals_cart() {
    let data = noisy_linear(5, 300);
    let tree = CartParams::default();
    let forest = RandomForest::fit(
        &data,
        &ForestParams {
            n_trees: 1,
            tree,
            bootstrap: false,
            max_features: Some(2),
        },
        17,
    );
    let cart = DecisionTree::fit(&data, &tree);
    for p in probe_grid() {
        assert_eq!(forest.score(&p), cart.score(&p), "at {p:?}");
    }
}

fn assert_monotone_along(score: impl Fn(&[f64]) -> f64, w: &[f64]) {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut prev = f64::NEG_INFINITY;
    for i in -40..=40 {
        let t = 0.1 * i as f64 / norm;
        let s = score(&[t * w[0], t * w[1]]);
        assert!(s >= prev, "score decreased to {s} at t={t}");
        prev = s;
    }
}

#[test]
fn linear_models_are_monotone_along_their_weights() {
    let data = noisy_linear(8, 500);
    let lda = LinearDiscriminant::fit(&data, &Default::default());
    assert_monotone_along(|x| lda.score(x), &lda.weights);
    let svm = LinearSvm::fit(&data, &SvmParams::default());
    assert_monotone_along(|x| svm.score(x), &svm.raw_direction());
}

#[test]
fn all_negative_training_scores_at_the_floor() {
    let rows: Vec<[f64; 2]> = (0..40).map(|i| [1.0 + 0.001 * i as f64, 1.0 - 0.002 * (i % 7) as f64]).collect();
    let data = set(&rows, &[0; 40]);
    let floor = 1.0 / (data.len() as f64 + 2.0);
    for kind in ModelKind::ALL {
        let model = models::train(&ModelSpec::with_defaults(kind, 1), &data).unwrap();
        for p in [[1.0, 1.0], [1.02, 0.99], [0.5, 1.5], [1.5, 0.5]] {
            let s = model.score(&p).unwrap();
            if let models::Fitted::Dtmc(chain) = &model.fitted {
                let seen = chain.counts.get(&chain.state(&p)).map_or(0, |c| c.total);
                let cap = if seen == 0 { 0.0 } else { 1.0 / (seen as f64 + 2.0) };
                assert!(s <= cap, "dtmc {s} > {cap}");
            } else {
                assert!(s <= floor, "{kind}: {s} > {floor}");
            }
            assert_eq!(model.predict_label(&p, 0.5).unwrap(), 0);
        }
    }
}

#[test]
fn predict_label_uses_inclusive_threshold() {
    let data = set(&[[0.0, 0.0]; 10], &[1, 1, 1, 1, 1, 1, 1, 0, 0, 0]);
    let model = models::train(&ModelSpec::with_defaults(ModelKind::Cart, 0), &data).unwrap();
    assert_eq!(model.score(&[0.0, 0.0]).unwrap(), 0.7);
    assert_eq!(model.predict_label(&[0.0, 0.0], 0.7).unwrap(), 1);
    assert_eq!(model.predict_label(&[0.0, 0.0], 0.71).unwrap(), 0);
    assert_eq!(model.predict_label(&[0.0, 0.0], 0.0).unwrap(), 1);
    assert!(model.predict_label(&[0.0, 0.0], 1.5).is_err());
}

#[test]
fn saved_models_reproduce_scores() {
    let data = noisy_linear(13, 200);
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let model = models::train(&ModelSpec::with_defaults(kind, 99), &data).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        model.save(&path).unwrap();
        let loaded = TrainedModel::load(&path).unwrap();
        for p in probe_grid() {
            assert_eq!(model.score(&p).unwrap(), loaded.score(&p).unwrap(), "{kind}");
        }
    }
}

#[test]
fn forest_depends_on_seed_only() {
    let data = noisy_linear(21, 200);
    let a = models::train(&ModelSpec::with_defaults(ModelKind::RandomForest, 1), &data).unwrap();
    let b = models::train(&ModelSpec::with_defaults(ModelKind::RandomForest, 1), &data).unwrap();
    let c = models::train(&ModelSpec::with_defaults(ModelKind::RandomForest, 2), &data).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
