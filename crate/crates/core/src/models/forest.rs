//! Bagged ensemble of Gini trees with per-split feature subsampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cart::{CartParams, DecisionTree};
use crate::features::SupervisedSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: CartParams,
    pub bootstrap: bool,
    /// Features considered per split; `None` means `ceil(sqrt(dim))`.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            tree: CartParams::default(),
            bootstrap: true,
            max_features: None,
        }
    }
}

impl ForestParams {
    pub fn features_per_split(&self, dim: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
            .clamp(1, dim.max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `i` draws from its own ChaCha stream `i` under `seed`, so each
    /// tree is reproducible regardless of build order.
    pub fn fit(data: &SupervisedSet, params: &ForestParams, seed: u64) -> Self {
        let n = data.len();
        let m = params.features_per_split(data.dim());
        let trees = (0..params.n_trees)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_rows(data, &params.tree, &rows, Some((&mut rng, m)))
            })
            .collect();
        Self { trees }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Mean of the trees' leaf proportions.
    pub fn score(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.score(x)).sum();
        sum / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> SupervisedSet {
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let a = ((i * 37) % 101) as f64 / 100.0;
                let b = ((i * 53) % 97) as f64 / 96.0;
                vec![a, b, a * b]
            })
            .collect();
        let targets = rows.iter().map(|r| u8::from(r[0] + r[1] > 1.0)).collect();
        SupervisedSet::from_rows(1, &rows, targets).unwrap()
    }

    #[test]
    fn default_subsample_is_ceil_sqrt() {
        let p = ForestParams::default();
        assert_eq!(p.features_per_split(2), 2);
        assert_eq!(p.features_per_split(3), 2);
        assert_eq!(p.features_per_split(10), 4);
    }

    #[test]
    fn score_is_tree_mean() {
        let d = data();
        let forest = RandomForest::fit(
            &d,
            &ForestParams {
                n_trees: 3,
                ..ForestParams::default()
            },
            5,
        );
        let x = [0.4, 0.7, 0.28];
        let mean = forest.trees().iter().map(|t| t.score(&x)).sum::<f64>() / 3.0;
        assert_eq!(forest.score(&x), mean);
    }

    #[test]
    fn seeded_and_reproducible() {
        let d = data();
        let p = ForestParams {
            n_trees: 10,
            ..ForestParams::default()
        };
        assert_eq!(RandomForest::fit(&d, &p, 1), RandomForest::fit(&d, &p, 1));
        assert_ne!(RandomForest::fit(&d, &p, 1), RandomForest::fit(&d, &p, 2));
    }
}
