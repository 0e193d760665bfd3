//! Confusion-matrix metrics: ACC, the four rates, G-means, MCC and nMCC.
//!
//! Rates whose denominator is zero are reported as 0 and flagged in
//! [`Degeneracy`] instead of failing, so batch runs over many buses keep going.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    /// Exchanges the roles of the two classes.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

/// Tallies predictions against ground truth.
pub fn confusion(pred: &[u8], truth: &[u8]) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Empty("confusion input"));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p != 0, t != 0) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Which metrics hit a zero denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degeneracy {
    /// No actual positives: TPR and FNR undefined.
    pub no_positives: bool,
    /// No actual negatives: FPR and TNR undefined.
    pub no_negatives: bool,
    /// A marginal of the matrix is empty: MCC undefined.
    pub mcc: bool,
}

impl Degeneracy {
    pub fn any(&self) -> bool {
        self.no_positives || self.no_negatives || self.mcc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub confusion: ConfusionMatrix,
    pub beta: f64,
    pub acc: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub tnr: f64,
    pub fnr: f64,
    pub gm: f64,
    pub mcc: f64,
    pub nmcc: f64,
    pub auc: f64,
    pub degeneracy: Degeneracy,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Geometric mean of sensitivity and specificity.
pub fn g_mean(tpr: f64, tnr: f64) -> f64 {
    (tpr * tnr).sqrt()
}

pub fn mcc(cm: &ConfusionMatrix) -> (f64, bool) {
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return (0.0, true);
    }
    let value = (tp * tn - fp * fn_) / den.sqrt();
    (value.clamp(-1.0, 1.0), false)
}

/// Derives every scalar metric from `cm`. `auc` and `beta` are carried through
/// as supplied by the caller.
pub fn report(cm: &ConfusionMatrix, beta: f64, auc: f64) -> Result<MetricReport> {
    if cm.total() == 0 {
        return Err(Error::Empty("confusion matrix"));
    }
    let tpr = ratio(cm.tp, cm.positives());
    let fnr = ratio(cm.fn_, cm.positives());
    let fpr = ratio(cm.fp, cm.negatives());
    let tnr = ratio(cm.tn, cm.negatives());
    let (mcc, mcc_degenerate) = mcc(cm);
    Ok(MetricReport {
        confusion: *cm,
        beta,
        acc: ratio(cm.tp + cm.tn, cm.total()),
        tpr,
        fpr,
        tnr,
        fnr,
        gm: g_mean(tpr, tnr),
        mcc,
        nmcc: (mcc + 1.0) / 2.0,
        auc,
        degeneracy: Degeneracy {
            no_positives: cm.positives() == 0,
            no_negatives: cm.negatives() == 0,
            mcc: mcc_degenerate,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2, 0, 0, 2));
        let truth = [1, 0, 0, 1, 1];
        let inverted: Vec<u8> = truth.iter().map(|t| 1 - t).collect();
        let cm = confusion(&inverted, &truth).unwrap();
        assert_eq!(cm.tp + cm.tn, 0);
        assert_eq!(cm.fp + cm.fn_, 5);
        let cm = confusion(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 1, 1, 1));
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(confusion(&[1], &[1, 0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(confusion(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn uninformative_symmetric() {
        let r = report(&ConfusionMatrix::new(25, 25, 25, 25), 0.5, 0.5).unwrap();
        assert_eq!(r.acc, 0.5);
        assert_eq!(r.mcc, 0.0);
        assert_eq!(r.nmcc, 0.5);
        assert!(!r.degeneracy.any());
    }

    #[test]
    fn balanced_dtmc_fixture() {
        let r = report(&ConfusionMatrix::new(7237, 1023, 2156, 8869), 0.25, 0.0).unwrap();
        assert!(close(r.acc, 0.84, 0.01));
        assert!(close(r.tpr, 0.77, 0.01));
        assert!(close(r.fpr, 0.10, 0.01));
        assert!(close(r.gm, 0.83, 0.01));
        assert!(close(r.nmcc, 0.84, 0.01));
    }

    #[test]
    fn unbalanced_knn_fixture() {
        let r = report(&ConfusionMatrix::new(142, 97, 48, 18998), 0.53, 0.0).unwrap();
        assert!(close(r.acc, 0.99, 0.01));
        assert!(close(r.tpr, 0.75, 0.01));
        assert!(close(r.fpr, 0.01, 0.01));
        assert!(close(r.gm, 0.86, 0.01));
        assert!(close(r.nmcc, 0.83, 0.01));
    }

    #[test]
    fn balanced_knn_fixture() {
        let r = report(&ConfusionMatrix::new(9221, 4639, 172, 5253), 0.53, 0.0).unwrap();
        assert!(close(r.tpr, 0.98, 0.01));
        assert!(close(r.fpr, 0.47, 0.01));
        assert!(close(r.nmcc, 0.78, 0.01));
    }

    #[test]
    fn degenerate_rows_are_flagged() {
        let r = report(&ConfusionMatrix::new(0, 3, 0, 7), 0.5, 0.5).unwrap();
        assert!(r.degeneracy.no_positives);
        assert!(r.degeneracy.mcc);
        assert_eq!(r.tpr, 0.0);
        assert_eq!(r.mcc, 0.0);
        assert_eq!(r.nmcc, 0.5);
        assert!(report(&ConfusionMatrix::default(), 0.5, 0.5).is_err());
    }
}
