//! In-memory workflow: split, label, train, calibrate and evaluate every
//! `(bound, bus, model)` task of a run.
//!
//! Tasks run on a rayon pool but results are collected in task order, so the
//! output does not depend on the number of worker threads.

use rayon::prelude::*;

use crate::calibration::{self, Calibration, RocCurve};
use crate::config::{BoundRun, CalibrateOn, RunConfig};
use crate::error::{Error, Result};
use crate::features::{self, SupervisedSet};
use crate::ingest::{self, NetworkDataset};
use crate::metrics;
use crate::models::{self, ModelKind, TrainedModel};
use crate::report::RunResult;

/// A trained model together with its calibrated threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibratedModel {
    pub bus: u32,
    pub run: BoundRun,
    pub model: TrainedModel,
    pub calibration: Calibration,
    pub warning: Option<String>,
}

impl CalibratedModel {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskFailure {
    pub bus: u32,
    pub model: ModelKind,
    pub run: BoundRun,
    pub error: String,
}

impl std::fmt::Display for TaskFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "bus {} model {} ({}): {}",
            self.bus,
            self.model,
            self.run.tag(),
            self.error
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct TrainOutcome {
    pub models: Vec<CalibratedModel>,
    pub failures: Vec<TaskFailure>,
}

#[derive(Clone, Debug)]
pub struct Evaluated {
    pub result: RunResult,
    pub roc: Option<RocCurve>,
}

#[derive(Clone, Debug, Default)]
pub struct Evaluation {
    pub runs: Vec<Evaluated>,
    pub failures: Vec<TaskFailure>,
}

impl Evaluation {
    pub fn results(&self) -> Vec<RunResult> {
        self.runs.iter().map(|e| e.result.clone()).collect()
    }
}

/// Loads the configured CSV, or generates the synthetic scenario.
pub fn load_dataset(config: &RunConfig) -> Result<NetworkDataset> {
    match &config.data {
        Some(path) => ingest::load_csv(path),
        None => ingest::generate(&config.synth),
    }
}

/// Runs `f` on a pool of `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Per-bus supervised sets for one partition, indexed `[run][bus]`.
pub fn supervised_sets(
    config: &RunConfig,
    partition: &NetworkDataset,
) -> Result<Vec<Vec<SupervisedSet>>> {
    config
        .bound_runs()?
        .iter()
        .map(|run| features::decompose(partition, &run.bounds, config.features, run.kind))
        .collect()
}

/// Chooses `beta*`; a single-class calibration set falls back to 1.0.
pub fn calibrate(scores: &[f64], truth: &[u8], grid_step: f64) -> Result<(Calibration, Option<String>)> {
    match calibration::select_beta(scores, truth, grid_step) {
        Ok(cal) => Ok((cal, None)),
        Err(Error::SingleClass { positives, negatives }) => Ok((
            Calibration {
                beta_star: 1.0,
                gm_at_star: 0.0,
                grid_step,
            },
            Some(format!(
                "single-class calibration set ({positives} positive, {negatives} negative); beta* set to 1.0"
            )),
        )),
        Err(e) => Err(e),
    }
}

fn train_one(
    config: &RunConfig,
    kind: ModelKind,
    train: &SupervisedSet,
    calib: &SupervisedSet,
) -> Result<(TrainedModel, Calibration, Option<String>)> {
    let spec = config.model_spec(kind)?;
    let model = models::train(&spec, train)?;
    let scores = model.score_set(calib)?;
    let (cal, warning) = calibrate(&scores, calib.targets(), config.beta_step)?;
    Ok((model, cal, warning))
}

/// Trains and calibrates every `(bound, bus, model)` task on the training partition.
pub fn train_all(config: &RunConfig, dataset: &NetworkDataset) -> Result<TrainOutcome> {
    config.validate()?;
    let runs = config.bound_runs()?;
    let (train_part, test_part) = ingest::split(dataset, config.split)?;
    let train_sets = supervised_sets(config, &train_part)?;
    let calib_sets = match config.calibrate_on {
        CalibrateOn::Train => None,
        CalibrateOn::Test => Some(supervised_sets(config, &test_part)?),
    };
    let tasks: Vec<(usize, usize, ModelKind)> = (0..runs.len())
        .flat_map(|r| {
            let models = &config.models;
            (0..dataset.n_buses()).flat_map(move |b| models.iter().map(move |&k| (r, b, k)))
        })
        .collect();
    let outputs = with_threads(config.threads, || {
        tasks
            .par_iter()
            .map(|&(r, b, kind)| {
                let train = &train_sets[r][b];
                let calib = calib_sets.as_ref().map_or(train, |c| &c[r][b]);
                (r, b, kind, train_one(config, kind, train, calib))
            })
            .collect::<Vec<_>>()
    })?;
    let mut outcome = TrainOutcome::default();
    for (r, b, kind, output) in outputs {
        let bus = dataset.buses()[b].bus_id();
        match output {
            Ok((model, calibration, warning)) => outcome.models.push(CalibratedModel {
                bus,
                run: runs[r],
                model,
                calibration,
                warning,
            }),
            Err(e) => outcome.failures.push(TaskFailure {
                bus,
                model: kind,
                run: runs[r],
                error: e.to_string(),
            }),
        }
    }
    Ok(outcome)
}

fn evaluate_one(entry: &CalibratedModel, test: &SupervisedSet, grid_step: f64) -> Result<Evaluated> {
    let scores = entry.model.score_set(test)?;
    let beta = entry.calibration.beta_star;
    let pred: Vec<u8> = scores.iter().map(|&s| u8::from(s >= beta)).collect();
    let cm = metrics::confusion(&pred, test.targets())?;
    let roc = match calibration::roc(&scores, test.targets(), grid_step) {
        Ok(curve) => Some(curve),
        Err(Error::SingleClass { .. }) => None,
        Err(e) => return Err(e),
    };
    let auc = roc.as_ref().map_or(0.5, |c| c.auc);
    Ok(Evaluated {
        result: RunResult {
            bus: entry.bus,
            model: entry.kind(),
            event: entry.run.kind,
            bound: entry.run.value(),
            calibration: entry.calibration,
            metrics: metrics::report(&cm, beta, auc)?,
        },
        roc,
    })
}

/// Scores the test partition with each calibrated model.
pub fn evaluate_all(
    config: &RunConfig,
    dataset: &NetworkDataset,
    models: &[CalibratedModel],
) -> Result<Evaluation> {
    let runs = config.bound_runs()?;
    let (_, test_part) = ingest::split(dataset, config.split)?;
    let test_sets = supervised_sets(config, &test_part)?;
    let locate = |entry: &CalibratedModel| -> Result<&SupervisedSet> {
        let r = runs
            .iter()
            .position(|run| run.kind == entry.run.kind && run.value() == entry.run.value())
            .ok_or_else(|| Error::Missing(format!("bound {} is not configured", entry.run.tag())))?;
        let b = dataset
            .buses()
            .iter()
            .position(|s| s.bus_id() == entry.bus)
            .ok_or_else(|| Error::Missing(format!("bus {} is not in the dataset", entry.bus)))?;
        let set = &test_sets[r][b];
        if set.dim() != entry.model.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: entry.model.feature_dim,
                got: set.dim(),
            });
        }
        Ok(set)
    };
    let outputs = with_threads(config.threads, || {
        models
            .par_iter()
            .map(|entry| locate(entry).and_then(|set| evaluate_one(entry, set, config.beta_step)))
            .collect::<Vec<_>>()
    })?;
    let mut evaluation = Evaluation::default();
    for (entry, output) in models.iter().zip(outputs) {
        match output {
            Ok(e) => evaluation.runs.push(e),
            Err(e @ Error::DimensionMismatch { .. }) => return Err(e),
            Err(e) => evaluation.failures.push(TaskFailure {
                bus: entry.bus,
                model: entry.kind(),
                run: entry.run,
                error: e.to_string(),
            }),
        }
    }
    Ok(evaluation)
}

/// Trains then evaluates in one pass, without touching the filesystem.
pub fn run_experiment(config: &RunConfig, dataset: &NetworkDataset) -> Result<(TrainOutcome, Evaluation)> {
    let trained = train_all(config, dataset)?;
    let evaluation = evaluate_all(config, dataset, &trained.models)?;
    Ok((trained, evaluation))
}
