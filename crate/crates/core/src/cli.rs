//! File-backed subcommands: `synth`, `train`, `evaluate`, `predict`, `report`.
//!
//! Layout under `out_dir`:
//!
//! ```text
//! dataset.csv                          synth output
//! calibration.jsonl                    one record per (bus, model, bound)
//! models/<event>_<bound>/bus_<id>_<model>.json
//! results.jsonl                        one record per evaluated task
//! tables.txt, ranking.txt, ranking.jsonl
//! roc/<event>_<bound>/bus_<id>_<model>.csv
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::{self, Calibration};
use crate::config::{BoundRun, RunConfig};
use crate::error::{Error, Result};
use crate::features;
use crate::ingest;
use crate::labeling::{self, EventKind};
use crate::models::{ModelKind, TrainedModel};
use crate::pipeline::{self, CalibratedModel, TaskFailure};
use crate::report::{self, RunResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

pub const CALIBRATION_FILE: &str = "calibration.jsonl";
pub const RESULTS_FILE: &str = "results.jsonl";

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn model_file(run: &BoundRun, bus: u32, kind: ModelKind) -> PathBuf {
    Path::new("models")
        .join(run.tag())
        .join(format!("bus_{bus}_{kind}.json"))
}

/// Per-bus positive-event ratios for every configured bound.
pub fn ratio_table(config: &RunConfig, dataset: &ingest::NetworkDataset) -> Result<String> {
    let runs = config.bound_runs()?;
    let mut out = String::new();
    let _ = write!(out, "{:<8}", "bus");
    for run in &runs {
        let _ = write!(out, "{:>14}", format!("{} {}", run.kind, run.value()));
    }
    out.push('\n');
    for series in dataset.buses() {
        let _ = write!(out, "{:<8}", series.bus_id());
        for run in &runs {
            let ratio = labeling::positive_ratio(&labeling::label(series, &run.bounds, run.kind))?;
            let _ = write!(out, "{:>13.1}%", ratio * 100.0);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes the synthetic dataset and returns the positive-ratio table.
pub fn cmd_synth(config: &RunConfig, output: Option<&Path>) -> Result<(PathBuf, String)> {
    let dataset = ingest::generate(&config.synth)?;
    let path = output.map_or_else(|| config.out_dir.join("dataset.csv"), Path::to_path_buf);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    ingest::save_csv(&dataset, &path)?;
    Ok((path, ratio_table(config, &dataset)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub bus: u32,
    pub model: ModelKind,
    pub event: EventKind,
    pub bound: f64,
    pub beta_star: f64,
    pub gm_at_star: f64,
    pub grid_step: f64,
    pub model_file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct TrainSummary {
    pub trained: usize,
    pub warnings: Vec<String>,
    pub failures: Vec<TaskFailure>,
}

impl TrainSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_PARTIAL
        }
    }
}

/// Trains, calibrates and persists every `(bound, bus, model)` task.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    config.validate()?;
    let dataset = pipeline::load_dataset(config)?;
    let outcome = pipeline::train_all(config, &dataset)?;
    create_dir(&config.out_dir)?;
    let mut calibration = Vec::new();
    let mut summary = TrainSummary::default();
    for entry in &outcome.models {
        let rel = model_file(&entry.run, entry.bus, entry.kind());
        write_file(&config.out_dir.join(&rel), entry.model.to_json()?.as_bytes())?;
        if let Some(w) = &entry.warning {
            summary
                .warnings
                .push(format!("bus {} model {} ({}): {w}", entry.bus, entry.kind(), entry.run.tag()));
        }
        let record = CalibrationRecord {
            bus: entry.bus,
            model: entry.kind(),
            event: entry.run.kind,
            bound: entry.run.value(),
            beta_star: entry.calibration.beta_star,
            gm_at_star: entry.calibration.gm_at_star,
            grid_step: entry.calibration.grid_step,
            model_file: rel,
            warning: entry.warning.clone(),
        };
        serde_json::to_writer(&mut calibration, &record)?;
        calibration.push(b'\n');
    }
    write_file(&config.out_dir.join(CALIBRATION_FILE), &calibration)?;
    summary.trained = outcome.models.len();
    summary.failures = outcome.failures;
    Ok(summary)
}

pub fn read_calibration(out_dir: &Path) -> Result<Vec<CalibrationRecord>> {
    let path = out_dir.join(CALIBRATION_FILE);
    let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Missing(format!(
            "calibration file {} not found; run `vexpred train` first",
            path.display()
        )),
        _ => Error::io(&path, e),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Parse(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn find_record<'a>(
    records: &'a [CalibrationRecord],
    bus: u32,
    kind: ModelKind,
    run: &BoundRun,
) -> Result<&'a CalibrationRecord> {
    records
        .iter()
        .find(|r| r.bus == bus && r.model == kind && r.event == run.kind && r.bound == run.value())
        .ok_or_else(|| {
            Error::Missing(format!(
                "no calibration for bus {bus} model {kind} ({}); run `vexpred train` first",
                run.tag()
            ))
        })
}

fn load_calibrated(config: &RunConfig, record: &CalibrationRecord, run: BoundRun) -> Result<CalibratedModel> {
    let path = config.out_dir.join(&record.model_file);
    let model = TrainedModel::load(&path).map_err(|e| match e {
        Error::Io { .. } => Error::Missing(format!(
            "model file {} for bus {} model {} is missing",
            path.display(),
            record.bus,
            record.model
        )),
        other => other,
    })?;
    if model.feature_dim != config.features.window() {
        return Err(Error::DimensionMismatch {
            expected: config.features.window(),
            got: model.feature_dim,
        });
    }
    Ok(CalibratedModel {
        bus: record.bus,
        run,
        model,
        calibration: Calibration {
            beta_star: record.beta_star,
            gm_at_star: record.gm_at_star,
            grid_step: record.grid_step,
        },
        warning: record.warning.clone(),
    })
}

/// Loads every persisted model the configuration expects.
pub fn load_models(config: &RunConfig, dataset: &ingest::NetworkDataset) -> Result<Vec<CalibratedModel>> {
    let records = read_calibration(&config.out_dir)?;
    let mut models = Vec::new();
    for run in config.bound_runs()? {
        for series in dataset.buses() {
            for &kind in &config.models {
                let record = find_record(&records, series.bus_id(), kind, &run)?;
                models.push(load_calibrated(config, record, run)?);
            }
        }
    }
    Ok(models)
}

#[derive(Clone, Debug, Default)]
pub struct EvaluateSummary {
    pub results: Vec<RunResult>,
    pub tables: String,
    pub ranking: String,
    pub failures: Vec<TaskFailure>,
}

impl EvaluateSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_PARTIAL
        }
    }
}

/// One metric table per bus and bound.
pub fn render_tables(results: &[RunResult]) -> Result<String> {
    let mut groups: BTreeMap<(EventKind, u64, u32), Vec<RunResult>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.event, r.bound.to_bits(), r.bus))
            .or_default()
            .push(r.clone());
    }
    let mut tables = String::new();
    for group in groups.values() {
        tables.push_str(&report::metric_table(group)?);
        tables.push('\n');
    }
    Ok(tables)
}

/// nMCC ranking across buses for each bound.
pub fn render_rankings(results: &[RunResult]) -> Result<(String, Vec<report::DistributionSummary>)> {
    let mut per_bound: BTreeMap<(EventKind, u64), Vec<RunResult>> = BTreeMap::new();
    for r in results {
        per_bound
            .entry((r.event, r.bound.to_bits()))
            .or_default()
            .push(r.clone());
    }
    let mut ranking = String::new();
    let mut summaries = Vec::new();
    for ((event, bits), group) in &per_bound {
        let ranked = report::rank_models(group)?;
        ranking.push_str(&report::render_ranking(*event, f64::from_bits(*bits), &ranked));
        ranking.push('\n');
        summaries.extend(ranked);
    }
    Ok((ranking, summaries))
}

/// Scores the test partition with the persisted models and writes all reports.
pub fn cmd_evaluate(config: &RunConfig) -> Result<EvaluateSummary> {
    config.validate()?;
    let dataset = pipeline::load_dataset(config)?;
    let models = load_models(config, &dataset)?;
    let evaluation = pipeline::evaluate_all(config, &dataset, &models)?;
    let results = evaluation.results();

    let mut buf = Vec::new();
    report::write_results(&results, &mut buf)?;
    write_file(&config.out_dir.join(RESULTS_FILE), &buf)?;

    for e in &evaluation.runs {
        if let Some(curve) = &e.roc {
            let run_tag = format!("{}_{}", e.result.event, e.result.bound);
            let path = config
                .out_dir
                .join("roc")
                .join(run_tag)
                .join(format!("bus_{}_{}.csv", e.result.bus, e.result.model));
            let mut csv = Vec::new();
            calibration::write_roc_csv(curve, &mut csv).map_err(|err| Error::io(&path, err))?;
            write_file(&path, &csv)?;
        }
    }

    let tables = render_tables(&results)?;
    // Ranking needs the complete bus x model grid.
    let (ranking, summaries) = if evaluation.failures.is_empty() {
        render_rankings(&results)?
    } else {
        (String::new(), Vec::new())
    };
    write_file(&config.out_dir.join("tables.txt"), tables.as_bytes())?;
    write_file(&config.out_dir.join("ranking.txt"), ranking.as_bytes())?;
    let mut jsonl = Vec::new();
    for s in &summaries {
        serde_json::to_writer(&mut jsonl, s)?;
        jsonl.push(b'\n');
    }
    write_file(&config.out_dir.join("ranking.jsonl"), &jsonl)?;

    Ok(EvaluateSummary {
        results,
        tables,
        ranking,
        failures: evaluation.failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub bus: u32,
    pub model: ModelKind,
    pub event: EventKind,
    pub bound: f64,
    pub score: f64,
    pub beta_star: f64,
    pub label: u8,
}

/// Labels `t + h` for every bus in `window_csv` from its trailing samples.
pub fn cmd_predict(config: &RunConfig, window_csv: &Path) -> Result<Vec<Prediction>> {
    config.validate()?;
    let window = ingest::load_csv(window_csv)?;
    let records = read_calibration(&config.out_dir)?;
    let mut out = Vec::new();
    for run in config.bound_runs()? {
        for series in window.buses() {
            let x = features::latest_window(series.values(), config.features)?;
            for &kind in &config.models {
                let record = find_record(&records, series.bus_id(), kind, &run)?;
                let entry = load_calibrated(config, record, run)?;
                let beta = entry.calibration.beta_star;
                let score = entry.model.score(&x)?;
                out.push(Prediction {
                    bus: series.bus_id(),
                    model: kind,
                    event: run.kind,
                    bound: run.value(),
                    score,
                    beta_star: beta,
                    label: entry.model.predict_label(&x, beta)?,
                });
            }
        }
    }
    Ok(out)
}

pub fn render_predictions(predictions: &[Prediction]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6}{:<15}{:>12}{:>9}{:>7}{:>7}",
        "bus", "model", "bound", "score", "beta*", "label"
    );
    for p in predictions {
        let _ = writeln!(
            out,
            "{:<6}{:<15}{:>12}{:>9.4}{:>7.2}{:>7}",
            p.bus,
            p.model.as_str(),
            format!("{} {}", p.event, p.bound),
            p.score,
            p.beta_star,
            p.label
        );
    }
    out
}

/// Re-renders tables and rankings from an existing results file.
pub fn cmd_report(results_path: &Path) -> Result<(String, String)> {
    let file = fs::File::open(results_path).map_err(|e| Error::io(results_path, e))?;
    let results = report::read_results(BufReader::new(file))?;
    if results.is_empty() {
        return Err(Error::Empty("results file"));
    }
    Ok((render_tables(&results)?, render_rankings(&results)?.0))
}

/// Writes `text` to stdout, ignoring broken pipes.
pub fn print(text: &str) {
    let stdout = std::io::stdout();
    let mut lock = BufWriter::new(stdout.lock());
    let _ = lock.write_all(text.as_bytes());
    let _ = lock.flush();
}
