//! Shared fixtures, oracles and invariant checks for the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vexpred::features::{self, FeatureSpec, SupervisedSet};
use vexpred::ingest::VoltageSeries;
use vexpred::labeling::{self, EventKind, VoltageBounds};
use vexpred::metrics::{self, ConfusionMatrix};

/// One printed metric column: counts, then TPR, FPR, GM, ACC, nMCC.
pub struct Column {
    pub model: &'static str,
    pub counts: (u64, u64, u64, u64),
    pub printed: [f64; 5],
}

const fn col(model: &'static str, counts: (u64, u64, u64, u64), printed: [f64; 5]) -> Column {
    Column { model, counts, printed }
}

/// Balanced case (bus 12 at 1.05 p.u.).
pub const BALANCED: [Column; 7] = [
    col("DTMC", (7237, 1023, 2156, 8869), [0.77, 0.10, 0.83, 0.84, 0.84]),
    col("CART", (8750, 1945, 643, 7947), [0.93, 0.20, 0.87, 0.87, 0.87]),
    col("LDA", (8414, 1312, 979, 8580), [0.90, 0.13, 0.88, 0.88, 0.88]),
    col("SVM", (8227, 1145, 1166, 8747), [0.88, 0.12, 0.88, 0.88, 0.88]),
    col("NB", (8474, 1436, 919, 8456), [0.90, 0.15, 0.88, 0.88, 0.88]),
    col("kNN", (9221, 4639, 172, 5253), [0.98, 0.47, 0.72, 0.75, 0.78]),
    col("RF", (8749, 1941, 644, 7951), [0.93, 0.20, 0.87, 0.87, 0.87]),
];

/// Unbalanced case (bus 6 at 1.08 p.u.).
pub const UNBALANCED: [Column; 7] = [
    col("DTMC", (155, 223, 35, 18872), [0.82, 0.01, 0.90, 0.99, 0.79]),
    col("CART", (170, 573, 20, 18522), [0.89, 0.03, 0.93, 0.97, 0.72]),
    col("LDA", (175, 289, 15, 18806), [0.92, 0.02, 0.95, 0.98, 0.79]),
    col("SVM", (184, 724, 6, 18371), [0.97, 0.04, 0.97, 0.96, 0.72]),
    col("NB", (186, 852, 4, 18243), [0.98, 0.04, 0.97, 0.96, 0.70]),
    col("kNN", (142, 97, 48, 18998), [0.75, 0.01, 0.86, 0.99, 0.83]),
    col("RF", (170, 566, 20, 18529), [0.89, 0.03, 0.93, 0.97, 0.72]),
];

/// Returns the worst absolute deviation over every printed value of every column.
pub fn fixture_deviation(columns: &[Column]) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for c in columns {
        let (tp, fp, fn_, tn) = c.counts;
        let r = metrics::report(&ConfusionMatrix::new(tp, fp, fn_, tn), 0.5, 0.5).unwrap();
        let got = [r.tpr, r.fpr, r.gm, r.acc, r.nmcc];
        for (name, (g, p)) in ["TPR", "FPR", "GM", "ACC", "nMCC"].iter().zip(got.iter().zip(c.printed)) {
            let dev = (g - p).abs();
            if dev > worst.0 {
                worst = (dev, format!("{} {name}: {g:.4} vs {p}", c.model));
            }
        }
    }
    worst
}

/// Pairwise concordance: P(score_pos > score_neg) + 0.5 P(tie).
pub fn concordance_auc(scores: &[f64], truth: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if truth[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if truth[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                num += 1.0;
            } else if si == sj {
                num += 0.5;
            }
        }
    }
    num / pairs
}

/// Random scored sample with both classes present. `quantized` draws scores
/// from a coarse set so ties are frequent.
pub fn random_scored(rng: &mut ChaCha8Rng, quantized: bool) -> (Vec<f64>, Vec<u8>) {
    loop {
        let n = rng.random_range(2..=200);
        let truth: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.4))).collect();
        let pos = truth.iter().filter(|&&t| t == 1).count();
        if pos == 0 || pos == n {
            continue;
        }
        let scores = truth
            .iter()
            .map(|&t| {
                let s: f64 = (rng.random::<f64>() + 0.3 * f64::from(t)).min(1.0);
                if quantized {
                    (s * 8.0).round() / 8.0
                } else {
                    s
                }
            })
            .collect();
        return (scores, truth);
    }
}

/// Two-feature task separated by `x0 + x1 = 0` with a margin.
pub fn separable(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> SupervisedSet {
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    while rows.len() < n {
        let x: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let s = x[0] + x[1];
        if s.abs() < margin {
            continue;
        }
        rows.push(x.to_vec());
        targets.push(u8::from(s > 0.0));
    }
    SupervisedSet::from_rows(1, &rows, targets).unwrap()
}

/// Uniform inputs with labels independent of them.
pub fn shuffled(rng: &mut ChaCha8Rng, n: usize, positive_rate: f64) -> SupervisedSet {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let targets = (0..n).map(|_| u8::from(rng.random_bool(positive_rate))).collect();
    SupervisedSet::from_rows(1, &rows, targets).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn series(values: Vec<f64>) -> VoltageSeries {
    let ts = (0..values.len() as i64).map(|t| 1_600_000_000 + 900 * t).collect();
    VoltageSeries::new(1, ts, values).unwrap()
}

// Strategies -----------------------------------------------------------------

/// Voltages on a 1e-3 lattice so values frequently land exactly on a bound.
pub fn voltages(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((900u32..=1100).prop_map(|m| f64::from(m) / 1000.0), 1..max_len)
}

pub fn bound_value() -> impl Strategy<Value = f64> {
    (900u32..=1100).prop_map(|m| f64::from(m) / 1000.0)
}

pub fn confusion_matrix() -> impl Strategy<Value = ConfusionMatrix> {
    let count = prop_oneof![Just(0u64), 0u64..20, 0u64..1_000_000];
    (count.clone(), count.clone(), count.clone(), count)
        .prop_filter("non-empty", |(a, b, c, d)| a + b + c + d > 0)
        .prop_map(|(tp, fp, fn_, tn)| ConfusionMatrix::new(tp, fp, fn_, tn))
}

pub fn feature_spec() -> impl Strategy<Value = FeatureSpec> {
    (0usize..5, 0usize..5, 1usize..8).prop_map(|(l, d, h)| FeatureSpec::new(l, d, h).unwrap())
}

// Invariants -----------------------------------------------------------------

/// Over-bound labels are 1 exactly when `v > upper`; under-bound when `v < lower`.
pub fn labeling_strict(values: &[f64], a: f64, b: f64) -> Result<(), TestCaseError> {
    prop_assume!(a != b);
    let bounds = VoltageBounds::new(a.min(b), a.max(b)).unwrap();
    let s = series(values.to_vec());
    let over = labeling::label_over(&s, &bounds);
    let under = labeling::label_under(&s, &bounds);
    prop_assert_eq!(over.labels.len(), values.len());
    prop_assert_eq!(under.labels.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        prop_assert_eq!(over.labels[i], u8::from(v > bounds.upper()));
        prop_assert_eq!(under.labels[i], u8::from(v < bounds.lower()));
        if v == bounds.upper() {
            prop_assert_eq!(over.labels[i], 0);
        }
        if v == bounds.lower() {
            prop_assert_eq!(under.labels[i], 0);
        }
        prop_assert!(over.labels[i] + under.labels[i] <= 1);
    }
    Ok(())
}

/// Tightening a bound can only remove events.
pub fn labeling_monotone(values: &[f64], lo: f64, up: f64, delta: f64) -> Result<(), TestCaseError> {
    prop_assume!(lo < up);
    let s = series(values.to_vec());
    let loose = VoltageBounds::new(lo, up).unwrap();
    let tight_over = VoltageBounds::new(lo, up + delta).unwrap();
    let tight_under = VoltageBounds::new(lo - delta, up).unwrap();
    let pairs = [
        (labeling::label(&s, &loose, EventKind::OverBound), labeling::label(&s, &tight_over, EventKind::OverBound)),
        (labeling::label(&s, &loose, EventKind::UnderBound), labeling::label(&s, &tight_under, EventKind::UnderBound)),
    ];
    for (a, b) in &pairs {
        for (x, y) in a.labels.iter().zip(&b.labels) {
            prop_assert!(y <= x);
        }
    }
    Ok(())
}

/// Example count is `N - h - d - L` and every window/target pair is taken
/// from the right indices, with the target strictly after the last input.
pub fn features_laws(values: &[f64], spec: FeatureSpec, upper: f64) -> Result<(), TestCaseError> {
    let s = series(values.to_vec());
    let bounds = VoltageBounds::new(0.5, upper).unwrap();
    let events = labeling::label_over(&s, &bounds);
    let n = values.len();
    let built = features::build(&s, &events, spec);
    let overhead = spec.horizon + spec.delay + spec.lag;
    if n <= overhead {
        prop_assert!(built.is_err());
        return Ok(());
    }
    let set = built.unwrap();
    prop_assert_eq!(set.len(), n - overhead);
    prop_assert_eq!(set.dim(), spec.lag + 1);
    for i in 0..set.len() {
        let t = s.timestamps().iter().position(|&ts| ts == set.anchor_times()[i]).unwrap();
        let newest = t - spec.delay;
        let oldest = newest - spec.lag;
        prop_assert_eq!(set.input(i), &values[oldest..=newest]);
        prop_assert!(newest < t + spec.horizon);
        prop_assert_eq!(set.targets()[i], events.labels[t + spec.horizon]);
        if i > 0 {
            prop_assert!(set.anchor_times()[i] > set.anchor_times()[i - 1]);
        }
    }
    Ok(())
}

/// Ranges, complementarity, nMCC rescaling and MCC class symmetry.
pub fn metrics_laws(cm: ConfusionMatrix) -> Result<(), TestCaseError> {
    let r = metrics::report(&cm, 0.5, 0.5).unwrap();
    for v in [r.acc, r.tpr, r.fpr, r.tnr, r.fnr, r.gm, r.nmcc, r.auc] {
        prop_assert!((0.0..=1.0).contains(&v), "{v} out of range for {cm:?}");
    }
    prop_assert!((-1.0..=1.0).contains(&r.mcc));
    prop_assert_eq!(r.nmcc, (r.mcc + 1.0) / 2.0);
    if cm.positives() > 0 {
        prop_assert!((r.tpr + r.fnr - 1.0).abs() < 1e-12);
    }
    if cm.negatives() > 0 {
        prop_assert!((r.tnr + r.fpr - 1.0).abs() < 1e-12);
    }
    let (m, _) = metrics::mcc(&cm);
    let (m_swapped, _) = metrics::mcc(&cm.swapped());
    prop_assert!((m - m_swapped).abs() < 1e-12);
    let transposed = ConfusionMatrix::new(cm.tp, cm.fn_, cm.fp, cm.tn);
    prop_assert!((m - metrics::mcc(&transposed).0).abs() < 1e-12);
    let inverted = ConfusionMatrix::new(cm.fn_, cm.tn, cm.tp, cm.fp);
    prop_assert!((m + metrics::mcc(&inverted).0).abs() < 1e-12);
    Ok(())
}
