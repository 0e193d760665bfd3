use serde::{Deserialize, Serialize};

use crate::features::SupervisedSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    pub var_floor: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        Self { var_floor: 1e-9 }
    }
}

/// Per-class Gaussian moments; `prior` is the class frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassGaussian {
    pub prior: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl ClassGaussian {
    fn log_joint(&self, x: &[f64]) -> f64 {
        let mut acc = self.prior.ln();
        for ((v, m), s2) in x.iter().zip(&self.mean).zip(&self.var) {
            acc -= 0.5 * ((2.0 * std::f64::consts::PI * s2).ln() + (v - m) * (v - m) / s2);
        }
        acc
    }
}

/// Gaussian naive Bayes with maximum-likelihood variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNaiveBayes {
    /// Index 0 is the negative class, 1 the positive class.
    pub classes: [ClassGaussian; 2],
}

impl GaussianNaiveBayes {
    pub fn fit(data: &SupervisedSet, params: &NaiveBayesParams) -> Self {
        let dim = data.dim();
        let n = data.len() as f64;
        let fit_class = |label: u8| {
            let members: Vec<&[f64]> = data
                .inputs()
                .zip(data.targets())
                .filter(|(_, &t)| t == label)
                .map(|(x, _)| x)
                .collect();
            let count = members.len() as f64;
            let mut mean = vec![0.0; dim];
            let mut var = vec![params.var_floor; dim];
            if !members.is_empty() {
                for x in &members {
                    for (m, v) in mean.iter_mut().zip(*x) {
                        *m += v;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= count);
                let mut ss = vec![0.0; dim];
                for x in &members {
                    for ((s, v), m) in ss.iter_mut().zip(*x).zip(&mean) {
                        *s += (v - m) * (v - m);
                    }
                }
                var = ss
                    .into_iter()
                    .map(|s| (s / count).max(params.var_floor))
                    .collect();
            }
            ClassGaussian {
                prior: count / n,
                mean,
                var,
            }
        };
        Self {
            classes: [fit_class(0), fit_class(1)],
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let [neg, pos] = &self.classes;
        if pos.prior == 0.0 {
            return 0.0;
        }
        if neg.prior == 0.0 {
            return 1.0;
        }
        let diff = neg.log_joint(x) - pos.log_joint(x);
        super::sigmoid(-diff)
    }
}
