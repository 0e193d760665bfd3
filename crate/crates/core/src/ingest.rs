//! Multi-bus voltage data: CSV loading and writing, chronological splitting
//! and a seeded synthetic scenario generator.
//!
//! The CSV layout is `timestamp,bus_1,...,bus_B`, one row per instant. Timestamps
//! are accepted as integer epoch seconds or ISO-8601 date-times and are written
//! back as ISO-8601 UTC.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per day at the nominal 15-minute resolution.
pub const SAMPLES_PER_DAY: usize = 96;
/// Nominal sampling interval in seconds.
pub const SAMPLE_INTERVAL_SECS: i64 = 15 * 60;

/// Voltage magnitudes of one bus in per-unit.
#[derive(Clone, Debug, PartialEq)]
pub struct VoltageSeries {
    bus_id: u32,
    timestamps: Vec<i64>,
    values: Vec<f64>,
}

impl VoltageSeries {
    pub fn new(bus_id: u32, timestamps: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        if bus_id == 0 {
            return Err(Error::InvalidDataset("bus ids are 1-based".into()));
        }
        if timestamps.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: timestamps.len(),
                right: values.len(),
            });
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonIncreasingTimestamps { row: i + 2 });
        }
        if let Some(i) = values
            .iter()
            .position(|v| !v.is_finite() || *v <= 0.0 || *v >= 2.0)
        {
            return Err(Error::InvalidDataset(format!(
                "bus {bus_id} sample {i}: value {} outside (0, 2) p.u.",
                values[i]
            )));
        }
        Ok(Self {
            bus_id,
            timestamps,
            values,
        })
    }

    pub fn bus_id(&self) -> u32 {
        self.bus_id
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            bus_id: self.bus_id,
            timestamps: self.timestamps[range.clone()].to_vec(),
            values: self.values[range].to_vec(),
        }
    }
}

/// An ordered set of bus series sharing one timestamp axis.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkDataset {
    buses: Vec<VoltageSeries>,
}

impl NetworkDataset {
    pub fn new(buses: Vec<VoltageSeries>) -> Result<Self> {
        let first = buses
            .first()
            .ok_or_else(|| Error::InvalidDataset("at least one bus is required".into()))?;
        for bus in &buses[1..] {
            if bus.timestamps != first.timestamps {
                return Err(Error::InvalidDataset(format!(
                    "bus {} does not share the timestamp axis of bus {}",
                    bus.bus_id, first.bus_id
                )));
            }
        }
        let mut ids: Vec<u32> = buses.iter().map(|b| b.bus_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDataset("duplicate bus id".into()));
        }
        Ok(Self { buses })
    }

    pub fn buses(&self) -> &[VoltageSeries] {
        &self.buses
    }

    pub fn bus(&self, bus_id: u32) -> Option<&VoltageSeries> {
        self.buses.iter().find(|b| b.bus_id == bus_id)
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_samples(&self) -> usize {
        self.buses[0].len()
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.buses[0].timestamps
    }

    /// Keeps the samples in `range` for every bus.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            buses: self.buses.iter().map(|b| b.slice(range.clone())).collect(),
        }
    }
}

/// Chronological train/test split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.75,
        }
    }
}

impl SplitSpec {
    /// Number of training samples for a series of length `n`.
    pub fn train_len(&self, n: usize) -> Result<usize> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        let train = (self.train_fraction * n as f64).floor() as usize;
        if train == 0 || train >= n {
            return Err(Error::EmptyPartition {
                train_fraction: self.train_fraction,
                samples: n,
            });
        }
        Ok(train)
    }
}

/// Splits `dataset` into its earliest `floor(train_fraction * N)` samples and the remainder.
pub fn split(dataset: &NetworkDataset, spec: SplitSpec) -> Result<(NetworkDataset, NetworkDataset)> {
    let n = dataset.n_samples();
    let cut = spec.train_len(n)?;
    Ok((dataset.slice(0..cut), dataset.slice(cut..n)))
}

fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(secs) = raw.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    None
}

fn format_timestamp(secs: i64) -> String {
    match DateTime::from_timestamp(secs, 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => secs.to_string(),
    }
}

fn parse_bus_column(name: &str) -> Result<u32> {
    name.trim()
        .strip_prefix("bus_")
        .and_then(|id| id.parse::<u32>().ok())
        .filter(|id| *id > 0)
        .ok_or_else(|| Error::InvalidHeader(format!("expected bus_<id> column, found {name:?}")))
}

/// Parses a dataset from any reader in the `timestamp,bus_<id>,...` layout.
pub fn read_csv<R: Read>(reader: R) -> Result<NetworkDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::InvalidHeader(e.to_string()))?
        .clone();
    if header.len() < 2 || header.get(0).map(str::trim) != Some("timestamp") {
        return Err(Error::InvalidHeader(
            "expected header `timestamp,bus_<id>,...`".into(),
        ));
    }
    let columns: Vec<String> = header.iter().skip(1).map(|c| c.to_string()).collect();
    let ids = columns
        .iter()
        .map(|c| parse_bus_column(c))
        .collect::<Result<Vec<_>>>()?;

    let mut timestamps = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); ids.len()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let ts = parse_timestamp(&record[0]).ok_or_else(|| Error::MalformedRow {
            row,
            reason: format!("unparseable timestamp {:?}", &record[0]),
        })?;
        if let Some(&prev) = timestamps.last() {
            if ts <= prev {
                return Err(Error::NonIncreasingTimestamps { row });
            }
        }
        timestamps.push(ts);
        for (col, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::MalformedRow {
                row,
                reason: format!("column {}: not a number: {field:?}", columns[col]),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row,
                    column: columns[col].clone(),
                });
            }
            values[col].push(v);
        }
    }
    if timestamps.is_empty() {
        return Err(Error::InvalidDataset("no data rows".into()));
    }
    let buses = ids
        .into_iter()
        .zip(values)
        .map(|(id, vals)| VoltageSeries::new(id, timestamps.clone(), vals))
        .collect::<Result<Vec<_>>>()?;
    NetworkDataset::new(buses)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<NetworkDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file))
}

/// Writes the dataset with shortest round-trip float formatting.
pub fn write_csv<W: Write>(dataset: &NetworkDataset, mut out: W) -> std::io::Result<()> {
    let mut line = String::from("timestamp");
    for bus in dataset.buses() {
        line.push_str(&format!(",bus_{}", bus.bus_id));
    }
    writeln!(out, "{line}")?;
    for (t, &ts) in dataset.timestamps().iter().enumerate() {
        line.clear();
        line.push_str(&format_timestamp(ts));
        for bus in dataset.buses() {
            line.push(',');
            line.push_str(&bus.values[t].to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn save_csv(dataset: &NetworkDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(dataset, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Parameters of the synthetic network scenario.
///
/// Each bus is `base_level + per_bus_offset * bus_index + diurnal + noise + surge`,
/// where the diurnal term is a sinusoid with a one-day period and the surge term
/// is a network-wide calm/surge two-state chain adding `wind_surge_magnitude`
/// while in the surge state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_buses: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub base_level: f64,
    pub diurnal_amplitude: f64,
    pub noise_std: f64,
    /// Per-step probability of entering the surge state.
    pub wind_surge_rate: f64,
    pub wind_surge_magnitude: f64,
    /// Per-step probability of staying in the surge state once entered.
    pub wind_surge_persistence: f64,
    pub per_bus_offset: f64,
    /// Epoch seconds of the first sample.
    pub start: i64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_buses: 15,
            n_samples: 28_934,
            seed: 5,
            base_level: 1.047,
            diurnal_amplitude: 0.015,
            noise_std: 0.002,
            wind_surge_rate: 0.002,
            wind_surge_magnitude: 0.04,
            wind_surge_persistence: 0.98,
            per_bus_offset: -0.004,
            start: 1_609_459_200,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.n_buses == 0 || self.n_samples == 0 {
            return Err(Error::InvalidSynthSpec("n_buses and n_samples must be positive".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidSynthSpec(format!("noise_std {} must be >= 0", self.noise_std)));
        }
        for (name, p) in [
            ("wind_surge_rate", self.wind_surge_rate),
            ("wind_surge_persistence", self.wind_surge_persistence),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidSynthSpec(format!("{name} {p} outside [0, 1]")));
            }
        }
        let finite = [
            self.base_level,
            self.diurnal_amplitude,
            self.wind_surge_magnitude,
            self.per_bus_offset,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSynthSpec("non-finite level parameter".into()));
        }
        Ok(())
    }
}

/// Generates a synthetic network dataset; identical specs give identical output.
pub fn generate(spec: &SynthSpec) -> Result<NetworkDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_std)
        .map_err(|e| Error::InvalidSynthSpec(e.to_string()))?;
    let timestamps: Vec<i64> = (0..spec.n_samples as i64)
        .map(|t| spec.start + t * SAMPLE_INTERVAL_SECS)
        .collect();
    let mut values = vec![Vec::with_capacity(spec.n_samples); spec.n_buses];
    let mut surging = false;
    for t in 0..spec.n_samples {
        let u: f64 = rng.random();
        surging = if surging {
            u < spec.wind_surge_persistence
        } else {
            u < spec.wind_surge_rate
        };
        let phase = 2.0 * PI * (t % SAMPLES_PER_DAY) as f64 / SAMPLES_PER_DAY as f64;
        let common = spec.base_level
            + spec.diurnal_amplitude * phase.sin()
            + if surging { spec.wind_surge_magnitude } else { 0.0 };
        for (b, series) in values.iter_mut().enumerate() {
            let eps = if spec.noise_std > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            series.push(common + spec.per_bus_offset * b as f64 + eps);
        }
    }
    let buses = values
        .into_iter()
        .enumerate()
        .map(|(b, vals)| VoltageSeries::new(b as u32 + 1, timestamps.clone(), vals))
        .collect::<Result<Vec<_>>>()?;
    NetworkDataset::new(buses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus_csv() -> &'static str {
        "timestamp,bus_1,bus_2\n0,1.01,0.99\n900,1.02,0.98\n1800,1.03,0.97\n"
    }

    #[test]
    fn parses_three_rows_two_buses() {
        let ds = read_csv(two_bus_csv().as_bytes()).unwrap();
        assert_eq!(ds.n_buses(), 2);
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.buses()[1].values(), &[0.99, 0.98, 0.97]);
        assert_eq!(ds.timestamps(), &[0, 900, 1800]);
    }

    #[test]
    fn parses_iso_timestamps() {
        let csv = "timestamp,bus_3\n2021-01-01T00:00:00Z,1.0\n2021-01-01 00:15:00,1.0\n";
        let ds = read_csv(csv.as_bytes()).unwrap();
        assert_eq!(ds.timestamps(), &[1_609_459_200, 1_609_460_100]);
        assert_eq!(ds.buses()[0].bus_id(), 3);
    }

    #[test]
    fn rejects_repeated_timestamp() {
        let csv = "timestamp,bus_1\n0,1.0\n0,1.0\n";
        let err = read_csv(csv.as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "non-increasing timestamps at row 2");
    }

    #[test]
    fn rejects_nan_with_location() {
        let csv = "timestamp,bus_1,bus_2\n0,1.0,1.0\n900,1.0,NaN\n";
        match read_csv(csv.as_bytes()).unwrap_err() {
            Error::NonFiniteValue { row, column } => {
                assert_eq!(row, 2);
                assert_eq!(column, "bus_2");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_short_row() {
        let csv = "timestamp,bus_1,bus_2\n0,1.0\n";
        assert!(matches!(
            read_csv(csv.as_bytes()),
            Err(Error::MalformedRow { row: 1, .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_csv("/nonexistent/x.csv"), Err(Error::Io { .. })));
    }

    #[test]
    fn split_sizes() {
        let spec = SplitSpec::default();
        assert_eq!(spec.train_len(28_934).unwrap(), 21_700);
        assert_eq!(spec.train_len(4).unwrap(), 3);
        assert!(matches!(spec.train_len(1), Err(Error::EmptyPartition { .. })));
    }

    #[test]
    fn split_is_chronological() {
        let ds = read_csv(two_bus_csv().as_bytes()).unwrap();
        let (train, test) = split(&ds, SplitSpec { train_fraction: 0.5 }).unwrap();
        assert_eq!(train.n_samples(), 1);
        assert_eq!(test.n_samples(), 2);
        assert!(train.timestamps().last() < test.timestamps().first());
    }

    #[test]
    fn constant_when_stochastic_terms_off() {
        let spec = SynthSpec {
            n_buses: 3,
            n_samples: 50,
            noise_std: 0.0,
            wind_surge_rate: 0.0,
            diurnal_amplitude: 0.0,
            base_level: 1.0,
            per_bus_offset: 0.01,
            ..SynthSpec::default()
        };
        let ds = generate(&spec).unwrap();
        for (b, bus) in ds.buses().iter().enumerate() {
            let expected = 1.0 + 0.01 * b as f64;
            assert!(bus.values().iter().all(|v| *v == expected));
        }
    }

    #[test]
    fn generate_is_deterministic() {
        let spec = SynthSpec {
            n_samples: 500,
            ..SynthSpec::default()
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec { seed: 8, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn generate_rejects_bad_specs() {
        let zero = SynthSpec { n_buses: 0, ..SynthSpec::default() };
        assert!(generate(&zero).is_err());
        let neg = SynthSpec { noise_std: -1.0, ..SynthSpec::default() };
        assert!(generate(&neg).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let spec = SynthSpec {
            n_buses: 4,
            n_samples: 300,
            ..SynthSpec::default()
        };
        let ds = generate(&spec).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), ds);
    }
}
