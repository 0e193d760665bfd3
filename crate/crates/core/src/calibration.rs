//! Threshold sweep: ROC curve, trapezoidal AUC and the G-means optimal threshold.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::g_mean;

pub const DEFAULT_GRID_STEP: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub beta: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC points for descending thresholds, starting from a sentinel above every
/// score so the curve always opens at (0, 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub beta_star: f64,
    pub gm_at_star: f64,
    pub grid_step: f64,
}

/// Threshold grid `0, step, ..., 1`. The step must divide 1.
pub fn beta_grid(grid_step: f64) -> Result<Vec<f64>> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidGridStep(grid_step));
    }
    let n = (1.0 / grid_step).round();
    if (n * grid_step - 1.0).abs() > 1e-9 || n > 1e7 {
        return Err(Error::InvalidGridStep(grid_step));
    }
    let n = n as usize;
    Ok((0..=n).map(|i| i as f64 / n as f64).collect())
}

/// Scores paired with truth, sorted by descending score.
struct Ranked {
    sorted: Vec<(f64, bool)>,
    positives: usize,
    negatives: usize,
}

impl Ranked {
    fn new(scores: &[f64], truth: &[u8]) -> Result<Self> {
        if scores.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: truth.len(),
            });
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let positives = truth.iter().filter(|&&t| t != 0).count();
        let negatives = truth.len() - positives;
        if positives == 0 || negatives == 0 {
            return Err(Error::SingleClass {
                positives,
                negatives,
            });
        }
        let mut sorted: Vec<(f64, bool)> = scores
            .iter()
            .zip(truth)
            .map(|(&s, &t)| (s, t != 0))
            .collect();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        Ok(Self {
            sorted,
            positives,
            negatives,
        })
    }

    /// `(tp, fp)` at each threshold of `descending`, labelling `score >= beta` positive.
    fn sweep<'a>(&'a self, descending: impl IntoIterator<Item = f64> + 'a) -> impl Iterator<Item = (f64, usize, usize)> + 'a {
        let mut cursor = 0;
        let (mut tp, mut fp) = (0, 0);
        descending.into_iter().map(move |beta| {
            while cursor < self.sorted.len() && self.sorted[cursor].0 >= beta {
                if self.sorted[cursor].1 {
                    tp += 1;
                } else {
                    fp += 1;
                }
                cursor += 1;
            }
            (beta, tp, fp)
        })
    }

    fn point(&self, beta: f64, tp: usize, fp: usize) -> RocPoint {
        RocPoint {
            beta,
            fpr: fp as f64 / self.negatives as f64,
            tpr: tp as f64 / self.positives as f64,
        }
    }
}

fn trapezoid(points: &[RocPoint]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// ROC over the regular threshold grid.
pub fn roc(scores: &[f64], truth: &[u8], grid_step: f64) -> Result<RocCurve> {
    let ranked = Ranked::new(scores, truth)?;
    let mut betas = beta_grid(grid_step)?;
    betas.push(1.0 + grid_step);
    betas.reverse();
    let points: Vec<RocPoint> = ranked
        .sweep(betas)
        .map(|(beta, tp, fp)| ranked.point(beta, tp, fp))
        .collect();
    let auc = trapezoid(&points);
    Ok(RocCurve { points, auc })
}

/// ROC with one threshold per distinct score; its AUC is the exact
/// Mann-Whitney statistic with ties counted one half.
pub fn roc_exact(scores: &[f64], truth: &[u8]) -> Result<RocCurve> {
    let ranked = Ranked::new(scores, truth)?;
    let mut thresholds: Vec<f64> = vec![f64::INFINITY];
    for &(s, _) in &ranked.sorted {
        if thresholds.last() != Some(&s) {
            thresholds.push(s);
        }
    }
    let points: Vec<RocPoint> = ranked
        .sweep(thresholds)
        .map(|(beta, tp, fp)| ranked.point(beta, tp, fp))
        .collect();
    let auc = trapezoid(&points);
    Ok(RocCurve { points, auc })
}

/// G-means at every grid threshold, in ascending threshold order.
pub fn gm_curve(scores: &[f64], truth: &[u8], grid_step: f64) -> Result<Vec<(f64, f64)>> {
    let ranked = Ranked::new(scores, truth)?;
    let mut betas = beta_grid(grid_step)?;
    betas.reverse();
    let mut curve: Vec<(f64, f64)> = ranked
        .sweep(betas)
        .map(|(beta, tp, fp)| {
            let p = ranked.point(beta, tp, fp);
            (beta, g_mean(p.tpr, 1.0 - p.fpr))
        })
        .collect();
    curve.reverse();
    Ok(curve)
}

/// Picks the grid threshold maximizing G-means, preferring the largest threshold on ties.
pub fn select_beta(scores: &[f64], truth: &[u8], grid_step: f64) -> Result<Calibration> {
    let curve = gm_curve(scores, truth, grid_step)?;
    let (beta_star, gm_at_star) = curve
        .into_iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, (beta, gm)| {
            if gm >= best.1 {
                (beta, gm)
            } else {
                best
            }
        });
    Ok(Calibration {
        beta_star,
        gm_at_star,
        grid_step,
    })
}

pub fn write_roc_csv<W: Write>(curve: &RocCurve, mut out: W) -> std::io::Result<()> {
    writeln!(out, "beta,fpr,tpr")?;
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.beta, p.fpr, p.tpr)?;
    }
    out.flush()
}
