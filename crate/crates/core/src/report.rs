//! Aggregation of run results into comparison tables and per-model nMCC
//! distributions across buses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::labeling::EventKind;
use crate::metrics::{ConfusionMatrix, MetricReport};
use crate::models::ModelKind;

/// Outcome of one `(bus, model, bound)` evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub bus: u32,
    pub model: ModelKind,
    pub event: EventKind,
    pub bound: f64,
    pub calibration: Calibration,
    pub metrics: MetricReport,
}

/// Flat record written one per line to the results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub bus: u32,
    pub model: ModelKind,
    pub event: EventKind,
    pub bound: f64,
    pub beta_star: f64,
    pub gm_at_star: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub acc: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub tnr: f64,
    pub fnr: f64,
    pub gm: f64,
    pub auc: f64,
    pub mcc: f64,
    pub nmcc: f64,
    pub degenerate: bool,
}

impl From<&RunResult> for ResultRecord {
    fn from(r: &RunResult) -> Self {
        let m = &r.metrics;
        Self {
            bus: r.bus,
            model: r.model,
            event: r.event,
            bound: r.bound,
            beta_star: r.calibration.beta_star,
            gm_at_star: r.calibration.gm_at_star,
            tp: m.confusion.tp,
            fp: m.confusion.fp,
            fn_: m.confusion.fn_,
            tn: m.confusion.tn,
            acc: m.acc,
            tpr: m.tpr,
            fpr: m.fpr,
            tnr: m.tnr,
            fnr: m.fnr,
            gm: m.gm,
            auc: m.auc,
            mcc: m.mcc,
            nmcc: m.nmcc,
            degenerate: m.degeneracy.any(),
        }
    }
}

impl ResultRecord {
    /// Rebuilds a result; degeneracy flags are recomputed from the counts.
    pub fn to_result(&self) -> Result<RunResult> {
        let cm = ConfusionMatrix::new(self.tp, self.fp, self.fn_, self.tn);
        let metrics = crate::metrics::report(&cm, self.beta_star, self.auc)?;
        Ok(RunResult {
            bus: self.bus,
            model: self.model,
            event: self.event,
            bound: self.bound,
            calibration: Calibration {
                beta_star: self.beta_star,
                gm_at_star: self.gm_at_star,
                grid_step: f64::NAN,
            },
            metrics,
        })
    }
}

pub fn write_results<W: Write>(results: &[RunResult], mut out: W) -> Result<()> {
    for r in results {
        serde_json::to_writer(&mut out, &ResultRecord::from(r))?;
        out.write_all(b"\n").map_err(|e| Error::io("results", e))?;
    }
    out.flush().map_err(|e| Error::io("results", e))
}

pub fn read_results<R: BufRead>(input: R) -> Result<Vec<RunResult>> {
    let mut results = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("results", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ResultRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("results line {}: {e}", i + 1)))?;
        results.push(record.to_result()?);
    }
    Ok(results)
}

const ROWS: [&str; 10] = ["beta*", "TP", "FP", "FN", "TN", "TPR", "FPR", "GM", "ACC", "nMCC"];
const DEG: &str = " (deg)";

fn column(r: &RunResult) -> [String; 10] {
    let m = &r.metrics;
    let d = m.degeneracy;
    let rate = |v: f64, deg: bool| {
        let mut s = format!("{v:.2}");
        if deg {
            s.push_str(DEG);
        }
        s
    };
    [
        format!("{:.2}", r.calibration.beta_star),
        m.confusion.tp.to_string(),
        m.confusion.fp.to_string(),
        m.confusion.fn_.to_string(),
        m.confusion.tn.to_string(),
        rate(m.tpr, d.no_positives),
        rate(m.fpr, d.no_negatives),
        rate(m.gm, d.no_positives || d.no_negatives),
        rate(m.acc, false),
        rate(m.nmcc, d.mcc),
    ]
}

/// Models as columns (in [`ModelKind`] order), metrics as rows.
pub fn metric_table(results: &[RunResult]) -> Result<String> {
    let first = results.first().ok_or(Error::Empty("metric table input"))?;
    if results
        .iter()
        .any(|r| r.bus != first.bus || r.bound != first.bound || r.event != first.event)
    {
        return Err(Error::Config(
            "metric table expects results for a single bus and bound".into(),
        ));
    }
    let mut sorted: Vec<&RunResult> = results.iter().collect();
    sorted.sort_by_key(|r| r.model);
    let columns: Vec<[String; 10]> = sorted.iter().map(|r| column(r)).collect();
    let width = columns
        .iter()
        .flat_map(|c| c.iter().map(String::len))
        .chain(sorted.iter().map(|r| r.model.label().len()))
        .max()
        .unwrap_or(4)
        + 2;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "# bus {} | {} bound {} p.u.",
        first.bus, first.event, first.bound
    );
    let _ = write!(out, "{:<6}", "");
    for r in &sorted {
        let _ = write!(out, "{:>width$}", r.model.label());
    }
    out.push('\n');
    for (i, name) in ROWS.iter().enumerate() {
        let _ = write!(out, "{name:<6}");
        for c in &columns {
            let _ = write!(out, "{:>width$}", c[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Values recovered from an emitted metric table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableColumn {
    pub model: ModelKind,
    pub beta_star: f64,
    pub confusion: ConfusionMatrix,
    pub tpr: f64,
    pub fpr: f64,
    pub gm: f64,
    pub acc: f64,
    pub nmcc: f64,
    pub degenerate: bool,
}

pub fn parse_metric_table(text: &str) -> Result<Vec<TableColumn>> {
    let bad = |msg: String| Error::Parse(format!("metric table: {msg}"));
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
    let models = header
        .split_whitespace()
        .map(str::parse::<ModelKind>)
        .collect::<Result<Vec<_>>>()?;
    let mut rows: BTreeMap<&str, Vec<(f64, bool)>> = BTreeMap::new();
    for line in lines {
        let cleaned = line.replace(DEG, "~");
        let mut cells = cleaned.split_whitespace();
        let name = cells.next().ok_or_else(|| bad("empty row".into()))?;
        let name = ROWS
            .iter()
            .find(|r| **r == name)
            .ok_or_else(|| bad(format!("unknown row {name:?}")))?;
        let values = cells
            .map(|c| {
                let deg = c.ends_with('~');
                c.trim_end_matches('~')
                    .parse::<f64>()
                    .map(|v| (v, deg))
                    .map_err(|_| bad(format!("bad cell {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != models.len() {
            return Err(bad(format!("row {name} has {} cells", values.len())));
        }
        rows.insert(name, values);
    }
    let get = |row: &str, i: usize| -> Result<(f64, bool)> {
        rows.get(row)
            .map(|v| v[i])
            .ok_or_else(|| bad(format!("missing row {row}")))
    };
    models
        .iter()
        .enumerate()
        .map(|(i, &model)| {
            let count = |row: &str| get(row, i).map(|(v, _)| v as u64);
            let (tpr, d1) = get("TPR", i)?;
            let (fpr, d2) = get("FPR", i)?;
            let (gm, d3) = get("GM", i)?;
            let (nmcc, d4) = get("nMCC", i)?;
            Ok(TableColumn {
                model,
                beta_star: get("beta*", i)?.0,
                confusion: ConfusionMatrix::new(count("TP")?, count("FP")?, count("FN")?, count("TN")?),
                tpr,
                fpr,
                gm,
                acc: get("ACC", i)?.0,
                nmcc,
                degenerate: d1 || d2 || d3 || d4,
            })
        })
        .collect()
}

/// Five-number summary of one model's nMCC across buses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub model: ModelKind,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub buses: usize,
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Tukey hinges: quartiles are the medians of the lower and upper halves,
/// excluding the median itself when the count is odd.
pub fn five_numbers(values: &[f64]) -> Option<[f64; 5]> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = median_sorted(&v);
    let half = n / 2;
    let (q1, q3) = if half == 0 {
        (median, median)
    } else {
        (median_sorted(&v[..half]), median_sorted(&v[n - half..]))
    };
    Some([v[0], q1, median, q3, v[n - 1]])
}

/// Per-model nMCC distributions, best median first.
pub fn rank_models(results: &[RunResult]) -> Result<Vec<DistributionSummary>> {
    let first = results.first().ok_or(Error::Empty("ranking input"))?;
    if results
        .iter()
        .any(|r| r.bound != first.bound || r.event != first.event)
    {
        return Err(Error::Config("ranking expects results for a single bound".into()));
    }
    let mut by_model: BTreeMap<ModelKind, BTreeMap<u32, f64>> = BTreeMap::new();
    for r in results {
        if by_model
            .entry(r.model)
            .or_default()
            .insert(r.bus, r.metrics.nmcc)
            .is_some()
        {
            return Err(Error::RaggedResults(format!(
                "duplicate result for bus {} model {}",
                r.bus, r.model
            )));
        }
    }
    let buses: BTreeSet<u32> = results.iter().map(|r| r.bus).collect();
    for (model, per_bus) in &by_model {
        if per_bus.len() != buses.len() {
            let missing: Vec<u32> = buses
                .iter()
                .filter(|b| !per_bus.contains_key(b))
                .copied()
                .collect();
            return Err(Error::RaggedResults(format!(
                "model {model} has no result for buses {missing:?}"
            )));
        }
    }
    let mut summaries: Vec<DistributionSummary> = by_model
        .into_iter()
        .map(|(model, per_bus)| {
            let values: Vec<f64> = per_bus.into_values().collect();
            let [min, q1, median, q3, max] = five_numbers(&values).expect("non-empty");
            DistributionSummary {
                model,
                min,
                q1,
                median,
                q3,
                max,
                buses: values.len(),
            }
        })
        .collect();
    summaries.sort_by(|a, b| b.median.total_cmp(&a.median).then(a.model.cmp(&b.model)));
    Ok(summaries)
}

pub fn render_ranking(event: EventKind, bound: f64, summaries: &[DistributionSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nMCC across buses | {event} bound {bound} p.u.");
    let _ = writeln!(
        out,
        "{:<6}{:>8}{:>8}{:>8}{:>8}{:>8}{:>7}",
        "model", "min", "q1", "median", "q3", "max", "buses"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<6}{:>8.3}{:>8.3}{:>8.3}{:>8.3}{:>8.3}{:>7}",
            s.model.label(),
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max,
            s.buses
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::report;

    pub(crate) fn result(bus: u32, model: ModelKind, cm: ConfusionMatrix, beta: f64) -> RunResult {
        RunResult {
            bus,
            model,
            event: EventKind::OverBound,
            bound: 1.05,
            calibration: Calibration {
                beta_star: beta,
                gm_at_star: 0.0,
                grid_step: 0.01,
            },
            metrics: report(&cm, beta, 0.5).unwrap(),
        }
    }

    fn with_nmcc(bus: u32, model: ModelKind, nmcc: f64) -> RunResult {
        let mut r = result(bus, model, ConfusionMatrix::new(1, 1, 1, 1), 0.5);
        r.metrics.nmcc = nmcc;
        r
    }

    #[test]
    fn dtmc_column_matches_fixture() {
        let r = result(12, ModelKind::Dtmc, ConfusionMatrix::new(7237, 1023, 2156, 8869), 0.25);
        let table = metric_table(&[r]).unwrap();
        let cols = parse_metric_table(&table).unwrap();
        assert_eq!(cols.len(), 1);
        let c = &cols[0];
        assert_eq!(c.beta_star, 0.25);
        assert_eq!(c.confusion, ConfusionMatrix::new(7237, 1023, 2156, 8869));
        assert_eq!((c.tpr, c.fpr, c.gm, c.acc, c.nmcc), (0.77, 0.10, 0.83, 0.84, 0.84));
    }

    #[test]
    fn columns_follow_kind_order() {
        let cm = ConfusionMatrix::new(5, 1, 1, 5);
        let table = metric_table(&[
            result(1, ModelKind::Dtmc, cm, 0.5),
            result(1, ModelKind::Cart, cm, 0.5),
        ])
        .unwrap();
        let cols = parse_metric_table(&table).unwrap();
        assert_eq!(cols[0].model, ModelKind::Cart);
        assert_eq!(cols[1].model, ModelKind::Dtmc);
    }

    #[test]
    fn degenerate_cells_annotated() {
        let r = result(1, ModelKind::Knn, ConfusionMatrix::new(0, 2, 0, 8), 0.5);
        let table = metric_table(&[r]).unwrap();
        assert!(table.contains("(deg)"));
        assert!(parse_metric_table(&table).unwrap()[0].degenerate);
    }

    #[test]
    fn table_rejects_empty_and_mixed() {
        assert!(metric_table(&[]).is_err());
        let cm = ConfusionMatrix::new(1, 1, 1, 1);
        assert!(metric_table(&[result(1, ModelKind::Knn, cm, 0.5), result(2, ModelKind::Lda, cm, 0.5)]).is_err());
    }

    #[test]
    fn quartiles() {
        assert_eq!(five_numbers(&[0.6, 0.8, 1.0]).unwrap(), [0.6, 0.6, 0.8, 1.0, 1.0]);
        assert_eq!(five_numbers(&[0.7]).unwrap(), [0.7; 5]);
        assert_eq!(five_numbers(&[1.0, 2.0, 3.0, 4.0]).unwrap(), [1.0, 1.5, 2.5, 3.5, 4.0]);
        assert_eq!(
            five_numbers(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap(),
            [1.0, 1.5, 3.0, 4.5, 5.0]
        );
    }

    #[test]
    fn ranking_by_median() {
        let results = vec![
            with_nmcc(1, ModelKind::Knn, 0.80),
            with_nmcc(2, ModelKind::Knn, 0.80),
            with_nmcc(1, ModelKind::Svm, 0.85),
            with_nmcc(2, ModelKind::Svm, 0.85),
        ];
        let ranked = rank_models(&results).unwrap();
        assert_eq!(ranked[0].model, ModelKind::Svm);
        assert_eq!(ranked[1].model, ModelKind::Knn);
        let mut reversed = results.clone();
        reversed.reverse();
        assert_eq!(rank_models(&reversed).unwrap(), ranked);
    }

    #[test]
    fn single_bus_ranking() {
        let ranked = rank_models(&[with_nmcc(3, ModelKind::Lda, 0.6), with_nmcc(3, ModelKind::Cart, 0.9)]).unwrap();
        assert_eq!(ranked[0].model, ModelKind::Cart);
        assert_eq!(ranked[0].median, 0.9);
        assert_eq!(ranked[1].min, 0.6);
    }

    #[test]
    fn ragged_rejected() {
        let results = vec![
            with_nmcc(1, ModelKind::Knn, 0.8),
            with_nmcc(2, ModelKind::Knn, 0.8),
            with_nmcc(1, ModelKind::Svm, 0.8),
        ];
        assert!(matches!(rank_models(&results), Err(Error::RaggedResults(_))));
    }

    #[test]
    fn results_file_round_trip() {
        let r = result(4, ModelKind::Svm, ConfusionMatrix::new(9, 3, 2, 40), 0.37);
        let mut buf = Vec::new();
        write_results(std::slice::from_ref(&r), &mut buf).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        for key in ["\"bus\"", "\"fn\"", "\"nmcc\"", "\"beta_star\"", "\"auc\""] {
            assert!(line.contains(key), "{key}");
        }
        let back = read_results(buf.as_slice()).unwrap();
        assert_eq!(back[0].metrics, r.metrics);
    }
}
