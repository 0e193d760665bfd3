/* Generated by cbindgen from crates/ffi. Do not edit. */

#ifndef VEXPRED_H
#define VEXPRED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  VX_EVENT_KIND_OVER = 0,
  VX_EVENT_KIND_UNDER = 1,
} VxEventKind;

typedef enum {
  VX_MODEL_KIND_CART = 0,
  VX_MODEL_KIND_RANDOM_FOREST = 1,
  VX_MODEL_KIND_KNN = 2,
  VX_MODEL_KIND_SVM = 3,
  VX_MODEL_KIND_NAIVE_BAYES = 4,
  VX_MODEL_KIND_LDA = 5,
  VX_MODEL_KIND_DTMC = 6,
} VxModelKind;

// Result code of every fallible call.
typedef enum {
  VX_STATUS_OK = 0,
  VX_STATUS_NULL_POINTER = 1,
  VX_STATUS_INVALID_ARGUMENT = 2,
  // Configuration or hyperparameter error.
  VX_STATUS_CONFIG = 3,
  // Malformed or inconsistent data.
  VX_STATUS_DATA = 4,
  VX_STATUS_IO = 5,
  VX_STATUS_DIMENSION_MISMATCH = 6,
  // Both classes are required but only one is present.
  VX_STATUS_SINGLE_CLASS = 7,
  // Caller buffer too small.
  VX_STATUS_BUFFER_TOO_SMALL = 8,
  VX_STATUS_PANIC = 99,
} VxStatus;

// Opaque multi-bus dataset.
typedef struct VxDataset VxDataset;

// Opaque trained model.
typedef struct VxModel VxModel;

typedef struct {
  size_t n_buses;
  size_t n_samples;
  uint64_t seed;
  double base_level;
  double diurnal_amplitude;
  double noise_std;
  double wind_surge_rate;
  double wind_surge_magnitude;
  double wind_surge_persistence;
  double per_bus_offset;
  int64_t start;
} VxSynthSpec;

// Window layout and bounds used to build a bus's supervised examples.
typedef struct {
  double lower;
  double upper;
  VxEventKind event;
  size_t lag;
  size_t delay;
  size_t horizon;
  double train_fraction;
} VxTaskSpec;

typedef struct {
  uint64_t tp;
  uint64_t fp;
  uint64_t fn_;
  uint64_t tn;
} VxConfusion;

typedef struct {
  double beta;
  double acc;
  double tpr;
  double fpr;
  double tnr;
  double fnr;
  double gm;
  double mcc;
  double nmcc;
  double auc;
  // Non-zero when a metric hit a zero denominator and was reported as 0.
  uint8_t degenerate;
} VxMetricReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next library call on the same thread.
const char *vx_last_error(void);

void vx_clear_error(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void vx_string_free(char *s);

// Library version as a static NUL-terminated string.
const char *vx_version(void);

// Fills `spec` with the default synthetic scenario.
//
// # Safety
// `spec` must be NULL or point to writable memory.
VxStatus vx_synth_spec_default(VxSynthSpec *spec);

// Generates a seeded synthetic dataset.
//
// # Safety
// `spec` must be readable and `dataset` writable.
VxStatus vx_dataset_generate(const VxSynthSpec *spec, VxDataset **dataset);

// Loads a `timestamp,bus_1,...` CSV file.
//
// # Safety
// `path` must be a NUL-terminated string and `dataset` writable.
VxStatus vx_dataset_load_csv(const char *path, VxDataset **dataset);

// Writes the dataset as CSV.
//
// # Safety
// `dataset` must be a live handle and `path` a NUL-terminated string.
VxStatus vx_dataset_save_csv(const VxDataset *dataset, const char *path);

// # Safety
// `dataset` must be a live handle; the out-pointers must be writable.
VxStatus vx_dataset_shape(const VxDataset *dataset, size_t *n_buses, size_t *n_samples);

// Copies the bus id at position `index` and its voltages into `values`,
// which must hold `n_samples` entries.
//
// # Safety
// `dataset` must be a live handle; `values` must hold `capacity` doubles.
VxStatus vx_dataset_bus(const VxDataset *dataset,
                        size_t index,
                        uint32_t *bus_id,
                        double *values,
                        size_t capacity);

// # Safety
// `dataset` must be NULL or a handle not yet freed.
void vx_dataset_free(VxDataset *dataset);

// Writes 0/1 excursion labels for `values` into `labels` (both length `n`).
//
// # Safety
// `values` and `labels` must hold `n` elements.
VxStatus vx_label(const double *values,
                  size_t n,
                  double lower,
                  double upper,
                  VxEventKind event,
                  uint8_t *labels);

// Trains a model on row-major `inputs` (`n` rows of `dim` values) and 0/1
// `targets`. `params` is NULL or `"key=value,..."` (e.g. `"k=7"`).
//
// # Safety
// Arrays must hold the stated number of elements; `model` must be writable.
VxStatus vx_model_train(VxModelKind kind,
                        const char *params,
                        uint64_t seed,
                        const double *inputs,
                        size_t n,
                        size_t dim,
                        const uint8_t *targets,
                        VxModel **model);

// Trains on the chronological training partition of one bus.
//
// # Safety
// `dataset` and `task` must be valid; `model` must be writable.
VxStatus vx_model_train_bus(const VxDataset *dataset,
                            uint32_t bus_id,
                            const VxTaskSpec *task,
                            VxModelKind kind,
                            const char *params,
                            uint64_t seed,
                            VxModel **model);

// Scores the chronological test partition of one bus. Writes up to
// `capacity` scores and targets and the example count to `n_out`;
// returns `VX_STATUS_BUFFER_TOO_SMALL` when `capacity` is short.
//
// # Safety
// Handles must be live; buffers must hold `capacity` elements.
VxStatus vx_model_score_bus(const VxModel *model,
                            const VxDataset *dataset,
                            uint32_t bus_id,
                            const VxTaskSpec *task,
                            double *scores,
                            uint8_t *targets,
                            size_t capacity,
                            size_t *n_out);

// # Safety
// `model` must be live; `input` must hold `dim` values; `score` writable.
VxStatus vx_model_score(const VxModel *model, const double *input, size_t dim, double *score);

// Label 1 iff score >= `beta`.
//
// # Safety
// As [`vx_model_score`].
VxStatus vx_model_predict_label(const VxModel *model,
                                const double *input,
                                size_t dim,
                                double beta,
                                uint8_t *label);

// # Safety
// `model` must be live; out-pointers writable.
VxStatus vx_model_info(const VxModel *model, VxModelKind *kind, size_t *feature_dim);

// # Safety
// `model` must be live and `path` NUL-terminated.
VxStatus vx_model_save(const VxModel *model, const char *path);

// # Safety
// `path` must be NUL-terminated and `model` writable.
VxStatus vx_model_load(const char *path, VxModel **model);

// Serializes the model to JSON; release with [`vx_string_free`].
//
// # Safety
// `model` must be live and `json` writable.
VxStatus vx_model_to_json(const VxModel *model, char **json);

// # Safety
// `json` must be NUL-terminated and `model` writable.
VxStatus vx_model_from_json(const char *json, VxModel **model);

// # Safety
// `model` must be NULL or a handle not yet freed.
void vx_model_free(VxModel *model);

// Counts predictions against truth (both 0/1, length `n`).
//
// # Safety
// Arrays must hold `n` elements; `cm` writable.
VxStatus vx_confusion(const uint8_t *pred, const uint8_t *truth, size_t n, VxConfusion *cm);

// Derives every scalar metric from a confusion matrix.
//
// # Safety
// `cm` readable, `report` writable.
VxStatus vx_metrics_report(const VxConfusion *cm, double beta, double auc, VxMetricReport *report);

// Trapezoidal AUC over the threshold grid `0, grid_step, ..., 1`.
//
// # Safety
// Arrays must hold `n` elements; `auc` writable.
VxStatus vx_roc_auc(const double *scores,
                    const uint8_t *truth,
                    size_t n,
                    double grid_step,
                    double *auc);

// AUC with one threshold per distinct score (ties count one half).
//
// # Safety
// As [`vx_roc_auc`].
VxStatus vx_roc_auc_exact(const double *scores, const uint8_t *truth, size_t n, double *auc);

// Grid threshold maximizing G-means (largest threshold on ties).
//
// # Safety
// Arrays must hold `n` elements; out-pointers writable.
VxStatus vx_select_beta(const double *scores,
                        const uint8_t *truth,
                        size_t n,
                        double grid_step,
                        double *beta_star,
                        double *gm_at_star);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VEXPRED_H */
