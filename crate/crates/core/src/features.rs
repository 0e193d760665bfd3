//! Per-bus supervised examples: a lagged voltage window paired with the
//! event label `h` steps ahead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{NetworkDataset, VoltageSeries};
use crate::labeling::{self, EventKind, EventSeries, VoltageBounds};

/// Window geometry: lag `L`, delay `d` and horizon `h`, in samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub lag: usize,
    pub delay: usize,
    pub horizon: usize,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            lag: 1,
            delay: 0,
            horizon: 4,
        }
    }
}

impl FeatureSpec {
    pub fn new(lag: usize, delay: usize, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Config("horizon h must be at least 1".into()));
        }
        Ok(Self {
            lag,
            delay,
            horizon,
        })
    }

    /// Number of inputs per example (`L + 1`).
    pub fn window(&self) -> usize {
        self.lag + 1
    }

    /// Samples consumed that do not yield an example.
    pub fn overhead(&self) -> usize {
        self.horizon + self.delay + self.lag
    }

    /// Number of trailing samples needed to form one prediction window.
    pub fn history(&self) -> usize {
        self.delay + self.lag + 1
    }
}

/// Examples for one bus, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SupervisedSet {
    bus_id: u32,
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<u8>,
    anchor_times: Vec<i64>,
}

impl SupervisedSet {
    /// Builds a set from explicit rows; anchors default to the row index.
    pub fn from_rows(bus_id: u32, rows: &[Vec<f64>], targets: Vec<u8>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: targets.len(),
            });
        }
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::Empty("supervised set"));
        }
        let mut inputs = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            inputs.extend_from_slice(row);
        }
        if targets.iter().any(|&t| t > 1) {
            return Err(Error::InvalidDataset("targets must be 0 or 1".into()));
        }
        Ok(Self {
            bus_id,
            dim,
            inputs,
            anchor_times: (0..rows.len() as i64).collect(),
            targets,
        })
    }

    pub fn bus_id(&self) -> u32 {
        self.bus_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn inputs(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.inputs.chunks_exact(self.dim)
    }

    /// Flat row-major input storage.
    pub fn raw_inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[u8] {
        &self.targets
    }

    pub fn anchor_times(&self) -> &[i64] {
        &self.anchor_times
    }

    pub fn positives(&self) -> usize {
        self.targets.iter().filter(|&&t| t == 1).count()
    }
}

/// Enumerates every anchor `t` with `d + L <= t <= N - 1 - h`, oldest input first.
pub fn build(series: &VoltageSeries, events: &EventSeries, spec: FeatureSpec) -> Result<SupervisedSet> {
    let n = series.len();
    if events.labels.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: events.labels.len(),
        });
    }
    if n <= spec.overhead() {
        return Err(Error::SeriesTooShort {
            len: n,
            required: spec.overhead() + 1,
        });
    }
    let first = spec.delay + spec.lag;
    let last = n - 1 - spec.horizon;
    let count = last + 1 - first;
    let dim = spec.window();
    let values = series.values();
    let mut inputs = Vec::with_capacity(count * dim);
    let mut targets = Vec::with_capacity(count);
    let mut anchor_times = Vec::with_capacity(count);
    for t in first..=last {
        let end = t - spec.delay;
        inputs.extend_from_slice(&values[end - spec.lag..=end]);
        targets.push(events.labels[t + spec.horizon]);
        anchor_times.push(series.timestamps()[t]);
    }
    Ok(SupervisedSet {
        bus_id: series.bus_id(),
        dim,
        inputs,
        targets,
        anchor_times,
    })
}

/// One independent set per bus, built from that bus's own series and labels.
pub fn decompose(
    dataset: &NetworkDataset,
    bounds: &VoltageBounds,
    spec: FeatureSpec,
    kind: EventKind,
) -> Result<Vec<SupervisedSet>> {
    dataset
        .buses()
        .iter()
        .map(|series| build(series, &labeling::label(series, bounds, kind), spec))
        .collect()
}

/// The most recent prediction window ending at the last sample of `values`.
pub fn latest_window(values: &[f64], spec: FeatureSpec) -> Result<Vec<f64>> {
    if values.len() < spec.history() {
        return Err(Error::SeriesTooShort {
            len: values.len(),
            required: spec.history(),
        });
    }
    let end = values.len() - 1 - spec.delay;
    Ok(values[end - spec.lag..=end].to_vec())
}
