//! Two-class linear discriminant with a pooled, ridge-stabilized covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::features::SupervisedSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    /// Ridge added to the covariance diagonal, relative to `trace / dim`.
    pub ridge: f64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self { ridge: 1e-6 }
    }
}

/// Posterior log-odds `w . x + b`; a single-class fit scores a constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearDiscriminant {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub constant: Option<f64>,
}

impl LinearDiscriminant {
    pub fn fit(data: &SupervisedSet, params: &LdaParams) -> Self {
        let dim = data.dim();
        let n = data.len();
        let n_pos = data.positives();
        let n_neg = n - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Self {
                weights: vec![0.0; dim],
                intercept: 0.0,
                constant: Some(if n_pos == 0 { 0.0 } else { 1.0 }),
            };
        }
        let mut means = [DVector::zeros(dim), DVector::zeros(dim)];
        for (x, &t) in data.inputs().zip(data.targets()) {
            means[t as usize] += DVector::from_column_slice(x);
        }
        means[0] /= n_neg as f64;
        means[1] /= n_pos as f64;

        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for (x, &t) in data.inputs().zip(data.targets()) {
            let d = DVector::from_column_slice(x) - &means[t as usize];
            cov += &d * d.transpose();
        }
        let dof = if n > 2 { n - 2 } else { n };
        cov /= dof as f64;
        let trace = cov.trace();
        let ridge = (params.ridge * trace / dim as f64).max(1e-12);
        for i in 0..dim {
            cov[(i, i)] += ridge;
        }

        let delta = &means[1] - &means[0];
        let w = match cov.clone().cholesky() {
            Some(chol) => chol.solve(&delta),
            None => cov
                .pseudo_inverse(1e-15)
                .map(|inv| inv * &delta)
                .unwrap_or_else(|_| DVector::zeros(dim)),
        };
        let midpoint = (&means[0] + &means[1]) * 0.5;
        let intercept = -midpoint.dot(&w) + (n_pos as f64 / n_neg as f64).ln();
        Self {
            weights: w.iter().copied().collect(),
            intercept,
            constant: None,
        }
    }

    pub fn log_odds(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.intercept
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        match self.constant {
            Some(c) => c,
            None => sigmoid(self.log_odds(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_spherical_classes_split_at_midpoint() {
        // Symmetric clouds around (0,0) and (2,0) with equal priors.
        let offsets = [[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5], [0.0, -0.5]];
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for (label, cx) in [(0u8, 0.0), (1u8, 2.0)] {
            for o in offsets {
                rows.push(vec![cx + o[0], o[1]]);
                targets.push(label);
            }
        }
        let data = SupervisedSet::from_rows(1, &rows, targets).unwrap();
        let lda = LinearDiscriminant::fit(&data, &LdaParams::default());
        assert!((lda.score(&[1.0, 0.3]) - 0.5).abs() < 1e-9);
        assert!(lda.score(&[1.5, 0.0]) > 0.5);
        assert!(lda.weights[1].abs() < 1e-9);
    }
}
