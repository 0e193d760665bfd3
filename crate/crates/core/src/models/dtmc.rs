//! Second-order discrete-time Markov chain over quantized voltage states.
//!
//! The last two window values are quantized into uniform bins spanning the
//! training range; the state pair indexes Laplace-smoothed counts of positive
//! outcomes. Pairs never seen in training back off to the global positive ratio.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SupervisedSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtmcParams {
    pub n_bins: usize,
    pub alpha: f64,
}

impl Default for DtmcParams {
    fn default() -> Self {
        Self {
            n_bins: 10,
            alpha: 1.0,
        }
    }
}

/// Uniform bins over `[min, max]`; values outside clamp to the edge bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub min: f64,
    pub max: f64,
    pub n_bins: usize,
}

impl Quantizer {
    pub fn bin(&self, v: f64) -> u16 {
        let width = (self.max - self.min) / self.n_bins as f64;
        if !(width > 0.0) {
            return 0;
        }
        let raw = ((v - self.min) / width).floor();
        raw.clamp(0.0, (self.n_bins - 1) as f64) as u16
    }

    /// Ascending bin edges, `n_bins + 1` of them.
    pub fn edges(&self) -> Vec<f64> {
        let width = (self.max - self.min) / self.n_bins as f64;
        (0..=self.n_bins)
            .map(|i| self.min + width * i as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub positives: u64,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovScorer {
    pub quantizer: Quantizer,
    pub alpha: f64,
    pub prior: f64,
    #[serde(with = "pair_map")]
    pub counts: BTreeMap<(u16, u16), PairCounts>,
}

impl MarkovScorer {
    pub fn fit(data: &SupervisedSet, params: &DtmcParams) -> Result<Self> {
        let dim = data.dim();
        if dim < 2 {
            return Err(Error::InvalidHyperparameter(
                "dtmc: a second-order chain needs at least two inputs per window (lag >= 1)".into(),
            ));
        }
        let (min, max) = data
            .inputs()
            .flat_map(|x| x[dim - 2..].iter().copied())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let quantizer = Quantizer {
            min,
            max,
            n_bins: params.n_bins,
        };
        let mut counts: BTreeMap<(u16, u16), PairCounts> = BTreeMap::new();
        for (x, &t) in data.inputs().zip(data.targets()) {
            let entry = counts
                .entry((quantizer.bin(x[dim - 2]), quantizer.bin(x[dim - 1])))
                .or_default();
            entry.total += 1;
            entry.positives += u64::from(t);
        }
        Ok(Self {
            quantizer,
            alpha: params.alpha,
            prior: data.positives() as f64 / data.len() as f64,
            counts,
        })
    }

    pub fn state(&self, x: &[f64]) -> (u16, u16) {
        let d = x.len();
        (self.quantizer.bin(x[d - 2]), self.quantizer.bin(x[d - 1]))
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        match self.counts.get(&self.state(x)) {
            Some(c) => (c.positives as f64 + self.alpha) / (c.total as f64 + 2.0 * self.alpha),
            None => self.prior,
        }
    }
}

/// JSON maps need string keys; state pairs are stored as a list instead.
mod pair_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::PairCounts;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(u16, u16), PairCounts>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let entries: Vec<((u16, u16), PairCounts)> = map.iter().map(|(k, v)| (*k, *v)).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(u16, u16), PairCounts>, D::Error> {
        let entries: Vec<((u16, u16), PairCounts)> = Vec::deserialize(d)?;
        Ok(entries.into_iter().collect())
    }
}
