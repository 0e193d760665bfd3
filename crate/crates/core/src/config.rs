//! Run configuration: a flat `key = value` file plus command-line overrides.
//!
//! ```text
//! # dataset: a CSV path, or synth.* keys for a generated scenario
//! data = grid.csv
//! v_upper = 1.05, 1.08
//! h = 4
//! L = 1
//! d = 0
//! beta_step = 0.01
//! models = cart, knn, dtmc
//! knn.k = 15
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::calibration::DEFAULT_GRID_STEP;
use crate::error::{Error, Result};
use crate::features::FeatureSpec;
use crate::ingest::{SplitSpec, SynthSpec};
use crate::labeling::{EventKind, VoltageBounds};
use crate::models::{ModelKind, ModelSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalibrateOn {
    Train,
    Test,
}

impl FromStr for CalibrateOn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(CalibrateOn::Train),
            "test" => Ok(CalibrateOn::Test),
            _ => Err(Error::Config(format!("calibrate_on must be train or test, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventSelection {
    Over,
    Under,
    Both,
}

/// One labelled problem: an event kind against a specific bound value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRun {
    pub kind: EventKind,
    pub bounds: VoltageBounds,
}

impl BoundRun {
    pub fn value(&self) -> f64 {
        self.kind.bound_of(&self.bounds)
    }

    /// Directory-safe tag such as `over_1.05`.
    pub fn tag(&self) -> String {
        format!("{}_{}", self.kind, self.value())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub synth: SynthSpec,
    pub v_upper: Vec<f64>,
    pub v_lower: Vec<f64>,
    pub events: EventSelection,
    pub features: FeatureSpec,
    pub split: SplitSpec,
    pub beta_step: f64,
    pub calibrate_on: CalibrateOn,
    pub models: Vec<ModelKind>,
    pub model_params: BTreeMap<ModelKind, BTreeMap<String, String>>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads for the (bus, model) grid; 0 uses the rayon default.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            synth: SynthSpec::default(),
            v_upper: vec![1.05, 1.08],
            v_lower: vec![0.95],
            events: EventSelection::Over,
            features: FeatureSpec::default(),
            split: SplitSpec::default(),
            beta_step: DEFAULT_GRID_STEP,
            calibrate_on: CalibrateOn::Train,
            models: ModelKind::ALL.to_vec(),
            model_params: BTreeMap::new(),
            seed: 42,
            out_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies an override written as `key=value`.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {pair:?} is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = (!value.is_empty()).then(|| PathBuf::from(value)),
            "v_upper" => self.v_upper = parse_list(key, value)?,
            "v_lower" => self.v_lower = parse_list(key, value)?,
            "events" => {
                self.events = match value {
                    "over" => EventSelection::Over,
                    "under" => EventSelection::Under,
                    "both" => EventSelection::Both,
                    _ => return Err(Error::Config(format!("events must be over, under or both, got {value:?}"))),
                }
            }
            "h" => self.features.horizon = parse_value(key, value)?,
            "L" => self.features.lag = parse_value(key, value)?,
            "d" => self.features.delay = parse_value(key, value)?,
            "train_fraction" => self.split.train_fraction = parse_value(key, value)?,
            "beta_step" => self.beta_step = parse_value(key, value)?,
            "calibrate_on" => self.calibrate_on = value.parse()?,
            "models" => self.models = parse_list(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "threads" => self.threads = parse_value(key, value)?,
            _ => {
                if let Some(field) = key.strip_prefix("synth.") {
                    return self.set_synth(field, value);
                }
                let (model, param) = key
                    .split_once('.')
                    .ok_or_else(|| Error::Config(format!("unknown key {key:?}")))?;
                let kind: ModelKind = model.parse()?;
                self.model_params
                    .entry(kind)
                    .or_default()
                    .insert(param.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    fn set_synth(&mut self, field: &str, value: &str) -> Result<()> {
        let s = &mut self.synth;
        let key = format!("synth.{field}");
        match field {
            "n_buses" => s.n_buses = parse_value(&key, value)?,
            "n_samples" => s.n_samples = parse_value(&key, value)?,
            "seed" => s.seed = parse_value(&key, value)?,
            "base_level" => s.base_level = parse_value(&key, value)?,
            "diurnal_amplitude" => s.diurnal_amplitude = parse_value(&key, value)?,
            "noise_std" => s.noise_std = parse_value(&key, value)?,
            "wind_surge_rate" => s.wind_surge_rate = parse_value(&key, value)?,
            "wind_surge_magnitude" => s.wind_surge_magnitude = parse_value(&key, value)?,
            "wind_surge_persistence" => s.wind_surge_persistence = parse_value(&key, value)?,
            "per_bus_offset" => s.per_bus_offset = parse_value(&key, value)?,
            "start" => s.start = parse_value(&key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Checks every field, including per-model hyperparameters.
    pub fn validate(&self) -> Result<()> {
        if self.features.horizon == 0 {
            return Err(Error::Config("h must be at least 1".into()));
        }
        self.split.train_len(usize::MAX / 2).map(|_| ())?;
        crate::calibration::beta_grid(self.beta_step)?;
        if self.models.is_empty() {
            return Err(Error::Config("models list is empty".into()));
        }
        for kind in self.model_params.keys() {
            if !self.models.contains(kind) {
                return Err(Error::Config(format!(
                    "hyperparameters given for {kind}, which is not in models"
                )));
            }
        }
        for kind in &self.models {
            self.model_spec(*kind)?;
        }
        self.bound_runs().map(|_| ())
    }

    pub fn model_spec(&self, kind: ModelKind) -> Result<ModelSpec> {
        let empty = BTreeMap::new();
        ModelSpec::new(kind, self.model_params.get(&kind).unwrap_or(&empty), self.seed)
    }

    /// Every labelled problem of the run: one per configured bound value.
    pub fn bound_runs(&self) -> Result<Vec<BoundRun>> {
        let mut runs = Vec::new();
        let over = matches!(self.events, EventSelection::Over | EventSelection::Both);
        let under = matches!(self.events, EventSelection::Under | EventSelection::Both);
        let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
        if over {
            if self.v_upper.is_empty() {
                return Err(Error::Config("v_upper is empty".into()));
            }
            let lower = if self.v_lower.is_empty() {
                0.0_f64.max(fold(&self.v_upper, f64::min, f64::INFINITY) - 0.1)
            } else {
                fold(&self.v_lower, f64::min, f64::INFINITY)
            };
            for &upper in &self.v_upper {
                runs.push(BoundRun {
                    kind: EventKind::OverBound,
                    bounds: VoltageBounds::new(lower, upper)?,
                });
            }
        }
        if under {
            if self.v_lower.is_empty() {
                return Err(Error::Config("v_lower is empty".into()));
            }
            let upper = if self.v_upper.is_empty() {
                fold(&self.v_lower, f64::max, f64::NEG_INFINITY) + 0.1
            } else {
                fold(&self.v_upper, f64::max, f64::NEG_INFINITY)
            };
            for &lower in &self.v_lower {
                runs.push(BoundRun {
                    kind: EventKind::UnderBound,
                    bounds: VoltageBounds::new(lower, upper)?,
                });
            }
        }
        Ok(runs)
    }
}
