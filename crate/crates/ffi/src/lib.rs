//! C ABI over `vexpred`.
//!
//! Conventions:
//! - Every fallible function returns a [`VxStatus`]; results go through out-pointers.
//! - On failure a message is stored per thread and read with [`vx_last_error`].
//! - Handles ([`VxDataset`], [`VxModel`]) are opaque and released with their `_free` function.
//! - Strings returned by the library are released with [`vx_string_free`].
//! - Panics never cross the boundary; they surface as `VX_STATUS_PANIC`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vexpred::calibration;
use vexpred::features::{self, FeatureSpec, SupervisedSet};
use vexpred::ingest::{self, NetworkDataset, SplitSpec, SynthSpec};
use vexpred::labeling::{self, EventKind, VoltageBounds};
use vexpred::metrics::{self, ConfusionMatrix};
use vexpred::models::{self, ModelKind, ModelSpec, TrainedModel};
use vexpred::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Configuration or hyperparameter error.
    Config = 3,
    /// Malformed or inconsistent data.
    Data = 4,
    Io = 5,
    DimensionMismatch = 6,
    /// Both classes are required but only one is present.
    SingleClass = 7,
    /// Caller buffer too small.
    BufferTooSmall = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VxEventKind {
    Over = 0,
    Under = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VxModelKind {
    Cart = 0,
    RandomForest = 1,
    Knn = 2,
    Svm = 3,
    NaiveBayes = 4,
    Lda = 5,
    Dtmc = 6,
}

/// Opaque multi-bus dataset.
pub struct VxDataset(NetworkDataset);

/// Opaque trained model.
pub struct VxModel(TrainedModel);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VxSynthSpec {
    pub n_buses: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub base_level: f64,
    pub diurnal_amplitude: f64,
    pub noise_std: f64,
    pub wind_surge_rate: f64,
    pub wind_surge_magnitude: f64,
    pub wind_surge_persistence: f64,
    pub per_bus_offset: f64,
    pub start: i64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VxConfusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VxMetricReport {
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
    /// Non-zero when a metric hit a zero denominator and was reported as 0.
    pub degenerate: u8,
}

/// Window layout and bounds used to build a bus's supervised examples.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VxTaskSpec {
    pub lower: f64,
    pub upper: f64,
    pub event: VxEventKind,
    pub lag: usize,
    pub delay: usize,
    pub horizon: usize,
    pub train_fraction: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(error: &Error) -> VxStatus {
    match error {
        Error::Io { .. } => VxStatus::Io,
        Error::Config(_) | Error::InvalidHyperparameter(_) | Error::InvalidGridStep(_) | Error::InvalidSynthSpec(_) => {
            VxStatus::Config
        }
        Error::InvalidBounds(_) | Error::InvalidThreshold(_) => VxStatus::InvalidArgument,
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => VxStatus::DimensionMismatch,
        Error::SingleClass { .. } => VxStatus::SingleClass,
        _ => VxStatus::Data,
    }
}

struct Failure(VxStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(VxStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic in the thread-local slot.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VxStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VxStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            VxStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(VxStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn model_kind(kind: VxModelKind) -> ModelKind {
    match kind {
        VxModelKind::Cart => ModelKind::Cart,
        VxModelKind::RandomForest => ModelKind::RandomForest,
        VxModelKind::Knn => ModelKind::Knn,
        VxModelKind::Svm => ModelKind::Svm,
        VxModelKind::NaiveBayes => ModelKind::NaiveBayes,
        VxModelKind::Lda => ModelKind::Lda,
        VxModelKind::Dtmc => ModelKind::Dtmc,
    }
}

fn vx_kind(kind: ModelKind) -> VxModelKind {
    match kind {
        ModelKind::Cart => VxModelKind::Cart,
        ModelKind::RandomForest => VxModelKind::RandomForest,
        ModelKind::Knn => VxModelKind::Knn,
        ModelKind::Svm => VxModelKind::Svm,
        ModelKind::NaiveBayes => VxModelKind::NaiveBayes,
        ModelKind::Lda => VxModelKind::Lda,
        ModelKind::Dtmc => VxModelKind::Dtmc,
    }
}

fn event_kind(kind: VxEventKind) -> EventKind {
    match kind {
        VxEventKind::Over => EventKind::OverBound,
        VxEventKind::Under => EventKind::UnderBound,
    }
}

/// Parses `key=value` pairs separated by commas or semicolons.
fn parse_params(raw: &str) -> Result<BTreeMap<String, String>, Failure> {
    raw.split([',', ';'])
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Failure(VxStatus::Config, format!("hyperparameter {p:?} is not key=value")))
        })
        .collect()
}

unsafe fn model_spec(kind: VxModelKind, params: *const c_char, seed: u64) -> Result<ModelSpec, Failure> {
    let values = if params.is_null() {
        BTreeMap::new()
    } else {
        parse_params(text(params, "params")?)?
    };
    Ok(ModelSpec::new(model_kind(kind), &values, seed)?)
}

fn store<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

// Errors and strings ---------------------------------------------------------

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn vx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn vx_clear_error() {
    clear_error();
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn vx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// Datasets -------------------------------------------------------------------

/// Fills `spec` with the default synthetic scenario.
///
/// # Safety
/// `spec` must be NULL or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn vx_synth_spec_default(spec: *mut VxSynthSpec) -> VxStatus {
    guard(|| {
        let d = SynthSpec::default();
        *out(spec, "spec")? = VxSynthSpec {
            n_buses: d.n_buses,
            n_samples: d.n_samples,
            seed: d.seed,
            base_level: d.base_level,
            diurnal_amplitude: d.diurnal_amplitude,
            noise_std: d.noise_std,
            wind_surge_rate: d.wind_surge_rate,
            wind_surge_magnitude: d.wind_surge_magnitude,
            wind_surge_persistence: d.wind_surge_persistence,
            per_bus_offset: d.per_bus_offset,
            start: d.start,
        };
        Ok(())
    })
}

/// Generates a seeded synthetic dataset.
///
/// # Safety
/// `spec` must be readable and `dataset` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_dataset_generate(spec: *const VxSynthSpec, dataset: *mut *mut VxDataset) -> VxStatus {
    guard(|| {
        let s = handle(spec, "spec")?;
        let slot = out(dataset, "dataset")?;
        let generated = ingest::generate(&SynthSpec {
            n_buses: s.n_buses,
            n_samples: s.n_samples,
            seed: s.seed,
            base_level: s.base_level,
            diurnal_amplitude: s.diurnal_amplitude,
            noise_std: s.noise_std,
            wind_surge_rate: s.wind_surge_rate,
            wind_surge_magnitude: s.wind_surge_magnitude,
            wind_surge_persistence: s.wind_surge_persistence,
            per_bus_offset: s.per_bus_offset,
            start: s.start,
        })?;
        store(slot, VxDataset(generated));
        Ok(())
    })
}

/// Loads a `timestamp,bus_1,...` CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `dataset` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_dataset_load_csv(path: *const c_char, dataset: *mut *mut VxDataset) -> VxStatus {
    guard(|| {
        let p = text(path, "path")?;
        let slot = out(dataset, "dataset")?;
        store(slot, VxDataset(ingest::load_csv(p)?));
        Ok(())
    })
}

/// Writes the dataset as CSV.
///
/// # Safety
/// `dataset` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vx_dataset_save_csv(dataset: *const VxDataset, path: *const c_char) -> VxStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        ingest::save_csv(&d.0, text(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn vx_dataset_shape(
    dataset: *const VxDataset,
    n_buses: *mut usize,
    n_samples: *mut usize,
) -> VxStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        *out(n_buses, "n_buses")? = d.0.n_buses();
        *out(n_samples, "n_samples")? = d.0.n_samples();
        Ok(())
    })
}

/// Copies the bus id at position `index` and its voltages into `values`,
/// which must hold `n_samples` entries.
///
/// # Safety
/// `dataset` must be a live handle; `values` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn vx_dataset_bus(
    dataset: *const VxDataset,
    index: usize,
    bus_id: *mut u32,
    values: *mut f64,
    capacity: usize,
) -> VxStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        let series = d.0.buses().get(index).ok_or_else(|| {
            Failure(VxStatus::InvalidArgument, format!("bus index {index} out of range ({} buses)", d.0.n_buses()))
        })?;
        *out(bus_id, "bus_id")? = series.bus_id();
        if capacity < series.len() {
            return Err(Failure(
                VxStatus::BufferTooSmall,
                format!("values buffer holds {capacity}, need {}", series.len()),
            ));
        }
        slice_mut(values, series.len(), "values")?.copy_from_slice(series.values());
        Ok(())
    })
}

/// # Safety
/// `dataset` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vx_dataset_free(dataset: *mut VxDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

// Labeling -------------------------------------------------------------------

/// Writes 0/1 excursion labels for `values` into `labels` (both length `n`).
///
/// # Safety
/// `values` and `labels` must hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn vx_label(
    values: *const f64,
    n: usize,
    lower: f64,
    upper: f64,
    event: VxEventKind,
    labels: *mut u8,
) -> VxStatus {
    guard(|| {
        let v = slice(values, n, "values")?;
        let dst = slice_mut(labels, n, "labels")?;
        let bounds = VoltageBounds::new(lower, upper)?;
        let ts: Vec<i64> = (0..n as i64).collect();
        let series = ingest::VoltageSeries::new(1, ts, v.to_vec())?;
        dst.copy_from_slice(&labeling::label(&series, &bounds, event_kind(event)).labels);
        Ok(())
    })
}

// Models ---------------------------------------------------------------------

/// Trains a model on row-major `inputs` (`n` rows of `dim` values) and 0/1
/// `targets`. `params` is NULL or `"key=value,..."` (e.g. `"k=7"`).
///
/// # Safety
/// Arrays must hold the stated number of elements; `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vx_model_train(
    kind: VxModelKind,
    params: *const c_char,
    seed: u64,
    inputs: *const f64,
    n: usize,
    dim: usize,
    targets: *const u8,
    model: *mut *mut VxModel,
) -> VxStatus {
    guard(|| {
        let spec = model_spec(kind, params, seed)?;
        if dim == 0 {
            return Err(Failure(VxStatus::InvalidArgument, "dim must be positive".into()));
        }
        let total = n.checked_mul(dim).ok_or_else(|| Failure(VxStatus::InvalidArgument, "n * dim overflows".into()))?;
        let x = slice(inputs, total, "inputs")?;
        let y = slice(targets, n, "targets")?;
        let slot = out(model, "model")?;
        let rows: Vec<Vec<f64>> = x.chunks(dim).map(<[f64]>::to_vec).collect();
        let data = SupervisedSet::from_rows(1, &rows, y.to_vec())?;
        store(slot, VxModel(models::train(&spec, &data)?));
        Ok(())
    })
}

fn bus_sets(d: &NetworkDataset, bus_id: u32, task: &VxTaskSpec) -> Result<(SupervisedSet, SupervisedSet), Failure> {
    let series = d
        .bus(bus_id)
        .ok_or_else(|| Failure(VxStatus::InvalidArgument, format!("bus {bus_id} is not in the dataset")))?;
    let one = NetworkDataset::new(vec![series.clone()])?;
    let (train, test) = ingest::split(&one, SplitSpec { train_fraction: task.train_fraction })?;
    let bounds = VoltageBounds::new(task.lower, task.upper)?;
    let spec = FeatureSpec::new(task.lag, task.delay, task.horizon)?;
    let kind = event_kind(task.event);
    let mut tr = features::decompose(&train, &bounds, spec, kind)?;
    let mut te = features::decompose(&test, &bounds, spec, kind)?;
    Ok((tr.remove(0), te.remove(0)))
}

/// Trains on the chronological training partition of one bus.
///
/// # Safety
/// `dataset` and `task` must be valid; `model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vx_model_train_bus(
    dataset: *const VxDataset,
    bus_id: u32,
    task: *const VxTaskSpec,
    kind: VxModelKind,
    params: *const c_char,
    seed: u64,
    model: *mut *mut VxModel,
) -> VxStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        let t = handle(task, "task")?;
        let spec = model_spec(kind, params, seed)?;
        let slot = out(model, "model")?;
        let (train, _) = bus_sets(&d.0, bus_id, t)?;
        store(slot, VxModel(models::train(&spec, &train)?));
        Ok(())
    })
}

/// Scores the chronological test partition of one bus. Writes up to
/// `capacity` scores and targets and the example count to `n_out`;
/// returns `VX_STATUS_BUFFER_TOO_SMALL` when `capacity` is short.
///
/// # Safety
/// Handles must be live; buffers must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn vx_model_score_bus(
    model: *const VxModel,
    dataset: *const VxDataset,
    bus_id: u32,
    task: *const VxTaskSpec,
    scores: *mut f64,
    targets: *mut u8,
    capacity: usize,
    n_out: *mut usize,
) -> VxStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let d = handle(dataset, "dataset")?;
        let t = handle(task, "task")?;
        let (_, test) = bus_sets(&d.0, bus_id, t)?;
        *out(n_out, "n_out")? = test.len();
        if capacity < test.len() {
            return Err(Failure(
                VxStatus::BufferTooSmall,
                format!("buffers hold {capacity}, need {}", test.len()),
            ));
        }
        let s = m.0.score_set(&test)?;
        slice_mut(scores, test.len(), "scores")?.copy_from_slice(&s);
        slice_mut(targets, test.len(), "targets")?.copy_from_slice(test.targets());
        Ok(())
    })
}

/// # Safety
/// `model` must be live; `input` must hold `dim` values; `score` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_model_score(
    model: *const VxModel,
    input: *const f64,
    dim: usize,
    score: *mut f64,
) -> VxStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let x = slice(input, dim, "input")?;
        *out(score, "score")? = m.0.score(x)?;
        Ok(())
    })
}

/// Label 1 iff score >= `beta`.
///
/// # Safety
/// As [`vx_model_score`].
#[no_mangle]
pub unsafe extern "C" fn vx_model_predict_label(
    model: *const VxModel,
    input: *const f64,
    dim: usize,
    beta: f64,
    label: *mut u8,
) -> VxStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let x = slice(input, dim, "input")?;
        *out(label, "label")? = m.0.predict_label(x, beta)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be live; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn vx_model_info(
    model: *const VxModel,
    kind: *mut VxModelKind,
    feature_dim: *mut usize,
) -> VxStatus {
    guard(|| {
        let m = handle(model, "model")?;
        *out(kind, "kind")? = vx_kind(m.0.kind());
        *out(feature_dim, "feature_dim")? = m.0.feature_dim;
        Ok(())
    })
}

/// # Safety
/// `model` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn vx_model_save(model: *const VxModel, path: *const c_char) -> VxStatus {
    guard(|| {
        handle(model, "model")?.0.save(text(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated and `model` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_model_load(path: *const c_char, model: *mut *mut VxModel) -> VxStatus {
    guard(|| {
        let p = text(path, "path")?;
        let slot = out(model, "model")?;
        store(slot, VxModel(TrainedModel::load(p)?));
        Ok(())
    })
}

/// Serializes the model to JSON; release with [`vx_string_free`].
///
/// # Safety
/// `model` must be live and `json` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_model_to_json(model: *const VxModel, json: *mut *mut c_char) -> VxStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let slot = out(json, "json")?;
        let s = CString::new(m.0.to_json()?).map_err(|e| Failure(VxStatus::Data, e.to_string()))?;
        *slot = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `json` must be NUL-terminated and `model` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_model_from_json(json: *const c_char, model: *mut *mut VxModel) -> VxStatus {
    guard(|| {
        let j = text(json, "json")?;
        let slot = out(model, "model")?;
        store(slot, VxModel(TrainedModel::from_json(j)?));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vx_model_free(model: *mut VxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

// Metrics and calibration ----------------------------------------------------

/// Counts predictions against truth (both 0/1, length `n`).
///
/// # Safety
/// Arrays must hold `n` elements; `cm` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_confusion(pred: *const u8, truth: *const u8, n: usize, cm: *mut VxConfusion) -> VxStatus {
    guard(|| {
        let c = metrics::confusion(slice(pred, n, "pred")?, slice(truth, n, "truth")?)?;
        *out(cm, "cm")? = VxConfusion {
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            tn: c.tn,
        };
        Ok(())
    })
}

/// Derives every scalar metric from a confusion matrix.
///
/// # Safety
/// `cm` readable, `report` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_metrics_report(
    cm: *const VxConfusion,
    beta: f64,
    auc: f64,
    report: *mut VxMetricReport,
) -> VxStatus {
    guard(|| {
        let c = handle(cm, "cm")?;
        let r = metrics::report(&ConfusionMatrix::new(c.tp, c.fp, c.fn_, c.tn), beta, auc)?;
        *out(report, "report")? = VxMetricReport {
            beta: r.beta,
            acc: r.acc,
            tpr: r.tpr,
            fpr: r.fpr,
            tnr: r.tnr,
            fnr: r.fnr,
            gm: r.gm,
            mcc: r.mcc,
            nmcc: r.nmcc,
            auc: r.auc,
            degenerate: u8::from(r.degeneracy.any()),
        };
        Ok(())
    })
}

/// Trapezoidal AUC over the threshold grid `0, grid_step, ..., 1`.
///
/// # Safety
/// Arrays must hold `n` elements; `auc` writable.
#[no_mangle]
pub unsafe extern "C" fn vx_roc_auc(
    scores: *const f64,
    truth: *const u8,
    n: usize,
    grid_step: f64,
    auc: *mut f64,
) -> VxStatus {
    guard(|| {
        let curve = calibration::roc(slice(scores, n, "scores")?, slice(truth, n, "truth")?, grid_step)?;
        *out(auc, "auc")? = curve.auc;
        Ok(())
    })
}

/// AUC with one threshold per distinct score (ties count one half).
///
/// # Safety
/// As [`vx_roc_auc`].
#[no_mangle]
pub unsafe extern "C" fn vx_roc_auc_exact(scores: *const f64, truth: *const u8, n: usize, auc: *mut f64) -> VxStatus {
    guard(|| {
        let curve = calibration::roc_exact(slice(scores, n, "scores")?, slice(truth, n, "truth")?)?;
        *out(auc, "auc")? = curve.auc;
        Ok(())
    })
}

/// Grid threshold maximizing G-means (largest threshold on ties).
///
/// # Safety
/// Arrays must hold `n` elements; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn vx_select_beta(
    scores: *const f64,
    truth: *const u8,
    n: usize,
    grid_step: f64,
    beta_star: *mut f64,
    gm_at_star: *mut f64,
) -> VxStatus {
    guard(|| {
        let c = calibration::select_beta(slice(scores, n, "scores")?, slice(truth, n, "truth")?, grid_step)?;
        *out(beta_star, "beta_star")? = c.beta_star;
        *out(gm_at_star, "gm_at_star")? = c.gm_at_star;
        Ok(())
    })
}
