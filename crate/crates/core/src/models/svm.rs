//! Linear SVM trained by epoch-ordered hinge-loss subgradient descent
//! (Pegasos step sizes), mapped to probabilities by Platt scaling.

use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::features::SupervisedSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub epochs: usize,
    pub lambda: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            epochs: 200,
            lambda: 1e-3,
        }
    }
}

/// Per-feature standardization fitted on the training inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &SupervisedSet) -> Self {
        let dim = data.dim();
        let n = data.len() as f64;
        let mut mean = vec![0.0; dim];
        for x in data.inputs() {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for x in data.inputs() {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (x[i] - self.mean[i]) / self.scale[i];
        }
    }
}

/// `P(y = 1 | f) = 1 / (1 + exp(a * f + b))` for decision value `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlattScaling {
    pub a: f64,
    pub b: f64,
}

impl PlattScaling {
    /// Newton fit with backtracking on Platt's regularized targets
    /// `(N+ + 1)/(N+ + 2)` and `1/(N- + 2)`.
    pub fn fit(decision: &[f64], labels: &[u8]) -> Self {
        let prior1 = labels.iter().filter(|&&l| l == 1).count() as f64;
        let prior0 = labels.len() as f64 - prior1;
        let hi = (prior1 + 1.0) / (prior1 + 2.0);
        let lo = 1.0 / (prior0 + 2.0);
        let targets: Vec<f64> = labels.iter().map(|&l| if l == 1 { hi } else { lo }).collect();

        if prior1 == 0.0 || prior0 == 0.0 {
            let t = if prior1 == 0.0 { lo } else { hi };
            return Self {
                a: 0.0,
                b: ((1.0 - t) / t).ln(),
            };
        }

        const MAX_ITER: usize = 100;
        const MIN_STEP: f64 = 1e-10;
        const SIGMA: f64 = 1e-12;
        const EPS: f64 = 1e-5;

        let objective = |a: f64, b: f64| -> f64 {
            decision
                .iter()
                .zip(&targets)
                .map(|(&f, &t)| {
                    let fapb = f * a + b;
                    if fapb >= 0.0 {
                        t * fapb + (1.0 + (-fapb).exp()).ln()
                    } else {
                        (t - 1.0) * fapb + (1.0 + fapb.exp()).ln()
                    }
                })
                .sum()
        };

        let mut a = 0.0;
        let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
        let mut fval = objective(a, b);
        for _ in 0..MAX_ITER {
            let (mut h11, mut h22, mut h21) = (SIGMA, SIGMA, 0.0);
            let (mut g1, mut g2) = (0.0, 0.0);
            for (&f, &t) in decision.iter().zip(&targets) {
                let fapb = f * a + b;
                let (p, q) = if fapb >= 0.0 {
                    let e = (-fapb).exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                } else {
                    let e = fapb.exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                };
                let d2 = p * q;
                h11 += f * f * d2;
                h22 += d2;
                h21 += f * d2;
                let d1 = t - p;
                g1 += f * d1;
                g2 += d1;
            }
            if g1.abs() < EPS && g2.abs() < EPS {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let gd = g1 * da + g2 * db;
            let mut step = 1.0;
            let mut accepted = false;
            while step >= MIN_STEP {
                let (na, nb) = (a + step * da, b + step * db);
                let nf = objective(na, nb);
                if nf < fval + 1e-4 * step * gd {
                    a = na;
                    b = nb;
                    fval = nf;
                    accepted = true;
                    break;
                }
                step /= 2.0;
            }
            if !accepted {
                break;
            }
        }
        Self { a, b }
    }

    pub fn probability(&self, decision: f64) -> f64 {
        sigmoid(-(self.a * decision + self.b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub standardizer: Standardizer,
    /// Weights over standardized inputs.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub platt: PlattScaling,
}

impl LinearSvm {
    /// The bias is learned as the weight of a constant unit feature. The
    /// returned weights average the iterates of the second half of training.
    pub fn fit(data: &SupervisedSet, params: &SvmParams) -> Self {
        let standardizer = Standardizer::fit(data);
        let dim = data.dim();
        let n = data.len();
        let mut z = vec![0.0; n * (dim + 1)];
        for (i, x) in data.inputs().enumerate() {
            let row = &mut z[i * (dim + 1)..(i + 1) * (dim + 1)];
            standardizer.apply(x, &mut row[..dim]);
            row[dim] = 1.0;
        }
        let y: Vec<f64> = data
            .targets()
            .iter()
            .map(|&t| if t == 1 { 1.0 } else { -1.0 })
            .collect();

        let lambda = params.lambda;
        let radius = 1.0 / lambda.sqrt();
        let mut w = vec![0.0; dim + 1];
        let mut avg = vec![0.0; dim + 1];
        let mut averaged = 0usize;
        let average_from = params.epochs / 2;
        let mut t = 0usize;
        for epoch in 0..params.epochs {
            for i in 0..n {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let row = &z[i * (dim + 1)..(i + 1) * (dim + 1)];
                let margin = y[i] * dot(&w, row);
                let shrink = 1.0 - eta * lambda;
                w.iter_mut().for_each(|v| *v *= shrink);
                if margin < 1.0 {
                    for (v, r) in w.iter_mut().zip(row) {
                        *v += eta * y[i] * r;
                    }
                }
                let norm = dot(&w, &w).sqrt();
                if norm > radius {
                    let s = radius / norm;
                    w.iter_mut().for_each(|v| *v *= s);
                }
                if epoch >= average_from {
                    averaged += 1;
                    let inv = 1.0 / averaged as f64;
                    for (a, v) in avg.iter_mut().zip(&w) {
                        *a += (v - *a) * inv;
                    }
                }
            }
        }
        let bias = avg[dim];
        avg.truncate(dim);
        let mut model = Self {
            standardizer,
            weights: avg,
            bias,
            platt: PlattScaling { a: 0.0, b: 0.0 },
        };
        let decision: Vec<f64> = data.inputs().map(|x| model.decision(x)).collect();
        model.platt = PlattScaling::fit(&decision, data.targets());
        model
    }

    /// Signed margin `w . z(x) + b`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        let mut acc = self.bias;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * (x[i] - self.standardizer.mean[i]) / self.standardizer.scale[i];
        }
        acc
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.platt.probability(self.decision(x))
    }

    /// Weight direction in raw input units.
    pub fn raw_direction(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.standardizer.scale)
            .map(|(w, s)| w / s)
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
