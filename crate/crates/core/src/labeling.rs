//! Binary excursion labels against operator-set voltage bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::VoltageSeries;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoltageBounds {
    lower: f64,
    upper: f64,
}

impl VoltageBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower > 0.0 && upper > 0.0) {
            return Err(Error::InvalidBounds(format!(
                "bounds must be finite and positive (lower {lower}, upper {upper})"
            )));
        }
        if lower >= upper {
            return Err(Error::InvalidBounds(format!(
                "lower {lower} must be below upper {upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    OverBound,
    UnderBound,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::OverBound => "over",
            EventKind::UnderBound => "under",
        }
    }

    /// The bound value this kind compares against.
    pub fn bound_of(&self, bounds: &VoltageBounds) -> f64 {
        match self {
            EventKind::OverBound => bounds.upper,
            EventKind::UnderBound => bounds.lower,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "over" | "over_bound" | "ob" => Ok(EventKind::OverBound),
            "under" | "under_bound" | "ub" => Ok(EventKind::UnderBound),
            _ => Err(Error::Config(format!("unknown event kind {s:?}"))),
        }
    }
}

/// 0/1 labels aligned with the source series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventSeries {
    pub bus_id: u32,
    pub kind: EventKind,
    pub labels: Vec<u8>,
}

/// Positive iff the sample is strictly above `bounds.upper`.
pub fn label_over(series: &VoltageSeries, bounds: &VoltageBounds) -> EventSeries {
    EventSeries {
        bus_id: series.bus_id(),
        kind: EventKind::OverBound,
        labels: series
            .values()
            .iter()
            .map(|&v| u8::from(v > bounds.upper))
            .collect(),
    }
}

/// Positive iff the sample is strictly below `bounds.lower`.
pub fn label_under(series: &VoltageSeries, bounds: &VoltageBounds) -> EventSeries {
    EventSeries {
        bus_id: series.bus_id(),
        kind: EventKind::UnderBound,
        labels: series
            .values()
            .iter()
            .map(|&v| u8::from(v < bounds.lower))
            .collect(),
    }
}

pub fn label(series: &VoltageSeries, bounds: &VoltageBounds, kind: EventKind) -> EventSeries {
    match kind {
        EventKind::OverBound => label_over(series, bounds),
        EventKind::UnderBound => label_under(series, bounds),
    }
}

pub fn positive_ratio(events: &EventSeries) -> Result<f64> {
    if events.labels.is_empty() {
        return Err(Error::Empty("event series"));
    }
    let pos = events.labels.iter().filter(|&&l| l == 1).count();
    Ok(pos as f64 / events.labels.len() as f64)
}
