//! Probability-scoring classifiers trained per bus.
//!
//! Every model maps an input window to `P(y = 1 | window)` in `[0, 1]`; a
//! threshold `beta` turns that score into a label (`score >= beta`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SupervisedSet;

pub mod cart;
pub mod dtmc;
pub mod forest;
pub mod knn;
pub mod lda;
pub mod naive_bayes;
pub mod svm;

pub use cart::{CartParams, DecisionTree};
pub use dtmc::{DtmcParams, MarkovScorer};
pub use forest::{ForestParams, RandomForest};
pub use knn::{KnnParams, NearestNeighbors};
pub use lda::{LdaParams, LinearDiscriminant};
pub use naive_bayes::{GaussianNaiveBayes, NaiveBayesParams};
pub use svm::{LinearSvm, SvmParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cart,
    RandomForest,
    Knn,
    Svm,
    NaiveBayes,
    Lda,
    Dtmc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Cart,
        ModelKind::RandomForest,
        ModelKind::Knn,
        ModelKind::Svm,
        ModelKind::NaiveBayes,
        ModelKind::Lda,
        ModelKind::Dtmc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Cart => "cart",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Knn => "knn",
            ModelKind::Svm => "svm",
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::Lda => "lda",
            ModelKind::Dtmc => "dtmc",
        }
    }

    /// Short column label used in tables.
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Cart => "CART",
            ModelKind::RandomForest => "RF",
            ModelKind::Knn => "kNN",
            ModelKind::Svm => "SVM",
            ModelKind::NaiveBayes => "NB",
            ModelKind::Lda => "LDA",
            ModelKind::Dtmc => "DTMC",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower || k.label().to_ascii_lowercase() == lower)
            .ok_or_else(|| Error::Config(format!("unknown model kind {s:?}")))
    }
}

/// Typed, kind-specific hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyperparams {
    Cart(CartParams),
    RandomForest(ForestParams),
    Knn(KnnParams),
    Svm(SvmParams),
    NaiveBayes(NaiveBayesParams),
    Lda(LdaParams),
    Dtmc(DtmcParams),
}

impl Hyperparams {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Cart => Hyperparams::Cart(CartParams::default()),
            ModelKind::RandomForest => Hyperparams::RandomForest(ForestParams::default()),
            ModelKind::Knn => Hyperparams::Knn(KnnParams::default()),
            ModelKind::Svm => Hyperparams::Svm(SvmParams::default()),
            ModelKind::NaiveBayes => Hyperparams::NaiveBayes(NaiveBayesParams::default()),
            ModelKind::Lda => Hyperparams::Lda(LdaParams::default()),
            ModelKind::Dtmc => Hyperparams::Dtmc(DtmcParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::Cart(_) => ModelKind::Cart,
            Hyperparams::RandomForest(_) => ModelKind::RandomForest,
            Hyperparams::Knn(_) => ModelKind::Knn,
            Hyperparams::Svm(_) => ModelKind::Svm,
            Hyperparams::NaiveBayes(_) => ModelKind::NaiveBayes,
            Hyperparams::Lda(_) => ModelKind::Lda,
            Hyperparams::Dtmc(_) => ModelKind::Dtmc,
        }
    }

    /// Overrides defaults from string pairs, rejecting unknown keys.
    pub fn from_map(kind: ModelKind, values: &BTreeMap<String, String>) -> Result<Self> {
        let mut params = Self::default_for(kind);
        for (key, value) in values {
            params.set(key, value)?;
        }
        params.validate()?;
        Ok(params)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let kind = self.kind();
        let unknown = || Error::InvalidHyperparameter(format!("{kind}: unknown key {key:?}"));
        match self {
            Hyperparams::Cart(p) => match key {
                "max_depth" => p.max_depth = parse(kind, key, value)?,
                "min_leaf" => p.min_leaf = parse(kind, key, value)?,
                _ => return Err(unknown()),
            },
            Hyperparams::RandomForest(p) => match key {
                "n_trees" => p.n_trees = parse(kind, key, value)?,
                "max_depth" => p.tree.max_depth = parse(kind, key, value)?,
                "min_leaf" => p.tree.min_leaf = parse(kind, key, value)?,
                "bootstrap" => p.bootstrap = parse(kind, key, value)?,
                "max_features" => p.max_features = Some(parse(kind, key, value)?),
                _ => return Err(unknown()),
            },
            Hyperparams::Knn(p) => match key {
                "k" => p.k = parse(kind, key, value)?,
                _ => return Err(unknown()),
            },
            Hyperparams::Svm(p) => match key {
                "epochs" => p.epochs = parse(kind, key, value)?,
                "lambda" => p.lambda = parse(kind, key, value)?,
                _ => return Err(unknown()),
            },
            Hyperparams::NaiveBayes(p) => match key {
                "var_floor" => p.var_floor = parse(kind, key, value)?,
                _ => return Err(unknown()),
            },
            Hyperparams::Lda(p) => match key {
                "ridge" => p.ridge = parse(kind, key, value)?,
                _ => return Err(unknown()),
            },
            Hyperparams::Dtmc(p) => match key {
                "n_bins" => p.n_bins = parse(kind, key, value)?,
                "alpha" => p.alpha = parse(kind, key, value)?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidHyperparameter(format!("{}: {msg}", self.kind())));
        match self {
            Hyperparams::Cart(p) => p.validate().or_else(|e| bad(&e)),
            Hyperparams::RandomForest(p) => {
                if p.n_trees == 0 {
                    return bad("n_trees must be positive");
                }
                if p.max_features == Some(0) {
                    return bad("max_features must be positive");
                }
                p.tree.validate().or_else(|e| bad(&e))
            }
            Hyperparams::Knn(p) if p.k == 0 => bad("k must be positive"),
            Hyperparams::Svm(p) if p.epochs == 0 || !(p.lambda > 0.0 && p.lambda.is_finite()) => {
                bad("epochs and lambda must be positive")
            }
            Hyperparams::NaiveBayes(p) if !(p.var_floor > 0.0 && p.var_floor.is_finite()) => {
                bad("var_floor must be positive")
            }
            Hyperparams::Lda(p) if !(p.ridge >= 0.0 && p.ridge.is_finite()) => {
                bad("ridge must be non-negative")
            }
            Hyperparams::Dtmc(p) if p.n_bins == 0 || p.n_bins > u16::MAX as usize => {
                bad("n_bins must be in 1..=65535")
            }
            Hyperparams::Dtmc(p) if !(p.alpha >= 0.0 && p.alpha.is_finite()) => {
                bad("alpha must be non-negative")
            }
            _ => Ok(()),
        }
    }
}

fn parse<T: FromStr>(kind: ModelKind, key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| {
        Error::InvalidHyperparameter(format!("{kind}: cannot parse {key} = {value:?}"))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub hyperparams: Hyperparams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, values: &BTreeMap<String, String>, seed: u64) -> Result<Self> {
        Ok(Self {
            hyperparams: Hyperparams::from_map(kind, values)?,
            seed,
        })
    }

    pub fn with_defaults(kind: ModelKind, seed: u64) -> Self {
        Self {
            hyperparams: Hyperparams::default_for(kind),
            seed,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.hyperparams.kind()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Fitted {
    Cart(DecisionTree),
    RandomForest(RandomForest),
    Knn(NearestNeighbors),
    Svm(LinearSvm),
    NaiveBayes(GaussianNaiveBayes),
    Lda(LinearDiscriminant),
    Dtmc(MarkovScorer),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub feature_dim: usize,
    pub n_examples: usize,
    pub n_positives: usize,
    pub fitted: Fitted,
}

/// Fits the requested model; deterministic for a given `(spec, data)`.
pub fn train(spec: &ModelSpec, data: &SupervisedSet) -> Result<TrainedModel> {
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if data.raw_inputs().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    spec.hyperparams.validate()?;
    let fitted = match &spec.hyperparams {
        Hyperparams::Cart(p) => Fitted::Cart(DecisionTree::fit(data, p)),
        Hyperparams::RandomForest(p) => Fitted::RandomForest(RandomForest::fit(data, p, spec.seed)),
        Hyperparams::Knn(p) => Fitted::Knn(NearestNeighbors::fit(data, p)),
        Hyperparams::Svm(p) => Fitted::Svm(LinearSvm::fit(data, p)),
        Hyperparams::NaiveBayes(p) => Fitted::NaiveBayes(GaussianNaiveBayes::fit(data, p)),
        Hyperparams::Lda(p) => Fitted::Lda(LinearDiscriminant::fit(data, p)),
        Hyperparams::Dtmc(p) => Fitted::Dtmc(MarkovScorer::fit(data, p)?),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_dim: data.dim(),
        n_examples: data.len(),
        n_positives: data.positives(),
        fitted,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    /// `P(y = 1 | input)`.
    pub fn score(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                got: input.len(),
            });
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(self.score_unchecked(input))
    }

    fn score_unchecked(&self, input: &[f64]) -> f64 {
        let p = match &self.fitted {
            Fitted::Cart(m) => m.score(input),
            Fitted::RandomForest(m) => m.score(input),
            Fitted::Knn(m) => m.score(input),
            Fitted::Svm(m) => m.score(input),
            Fitted::NaiveBayes(m) => m.score(input),
            Fitted::Lda(m) => m.score(input),
            Fitted::Dtmc(m) => m.score(input),
        };
        if p.is_nan() {
            0.0
        } else {
            p.clamp(0.0, 1.0)
        }
    }

    /// Scores every example of `data`.
    pub fn score_set(&self, data: &SupervisedSet) -> Result<Vec<f64>> {
        if data.dim() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                got: data.dim(),
            });
        }
        data.inputs().map(|x| self.score(x)).collect()
    }

    pub fn predict_label(&self, input: &[f64], beta: f64) -> Result<u8> {
        check_beta(beta)?;
        Ok(u8::from(self.score(input)? >= beta))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(beta))
    }
}

/// Logistic function, stable for large magnitudes.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SupervisedSet {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![1.0 + i as f64 * 0.001, 1.0 + (i % 7) as f64 * 0.002])
            .collect();
        let targets = (0..40).map(|i| u8::from(i >= 20)).collect();
        SupervisedSet::from_rows(1, &rows, targets).unwrap()
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut m = BTreeMap::new();
        m.insert("depth".to_string(), "3".to_string());
        assert!(matches!(
            ModelSpec::new(ModelKind::Cart, &m, 0),
            Err(Error::InvalidHyperparameter(_))
        ));
        let mut m = BTreeMap::new();
        m.insert("k".to_string(), "0".to_string());
        assert!(ModelSpec::new(ModelKind::Knn, &m, 0).is_err());
        let mut m = BTreeMap::new();
        m.insert("k".to_string(), "5".to_string());
        let spec = ModelSpec::new(ModelKind::Knn, &m, 0).unwrap();
        assert_eq!(spec.hyperparams, Hyperparams::Knn(KnnParams { k: 5 }));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.as_str().parse::<ModelKind>().unwrap(), kind);
            assert_eq!(kind.label().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("perceptron".parse::<ModelKind>().is_err());
    }

    #[test]
    fn score_checks_input() {
        let model = train(&ModelSpec::with_defaults(ModelKind::Lda, 0), &toy()).unwrap();
        assert!(matches!(
            model.score(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(model.score(&[1.0, f64::NAN]), Err(Error::NonFiniteInput)));
        assert!(matches!(
            model.predict_label(&[1.0, 1.0], 1.5),
            Err(Error::InvalidThreshold(_))
        ));
    }

    #[test]
    fn beta_zero_always_positive() {
        for kind in ModelKind::ALL {
            let model = train(&ModelSpec::with_defaults(kind, 3), &toy()).unwrap();
            for x in [[0.5, 0.5], [1.0, 1.0], [1.5, 1.5]] {
                assert_eq!(model.predict_label(&x, 0.0).unwrap(), 1, "{kind}");
            }
        }
    }

    #[test]
    fn json_round_trip_reproduces_scores() {
        let data = toy();
        for kind in ModelKind::ALL {
            let model = train(&ModelSpec::with_defaults(kind, 11), &data).unwrap();
            let back = TrainedModel::from_json(&model.to_json().unwrap()).unwrap();
            for x in data.inputs() {
                assert_eq!(model.score(x).unwrap(), back.score(x).unwrap(), "{kind}");
            }
        }
    }

    #[test]
    fn empty_training_set_rejected() {
        let data = toy();
        let spec = ModelSpec::with_defaults(ModelKind::Cart, 0);
        assert!(train(&spec, &data).is_ok());
        let mut bad = BTreeMap::new();
        bad.insert("n_bins".to_string(), "0".to_string());
        assert!(ModelSpec::new(ModelKind::Dtmc, &bad, 0).is_err());
    }
}
