/*
 * SPDX-License-Identifier: Apache-2.0
 * Copyright 2026 The chanpred Authors
 *
 * C interface to the chanpred channel prediction library.
 *
 * Objects are opaque handles created by cp_*_create/load/fit functions and
 * released with the matching cp_*_free. Every fallible call returns a
 * cp_status; on failure cp_last_error() returns a message for the calling
 * thread that stays valid until that thread's next library call.
 *
 * Complex numbers are passed as interleaved (re, im) double pairs.
 * Observation vectors are newest first: y[0] belongs to h[Mo-1].
 */

#ifndef CHANPRED_CHANPRED_H
#define CHANPRED_CHANPRED_H

#include <stddef.h>
#include <stdint.h>

#if defined(CHANPRED_BUILDING_LIBRARY)
#define CP_API __attribute__((visibility("default")))
#else
#define CP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_ERR_INVALID_ARGUMENT = 1,
  CP_ERR_DATA = 2,
  CP_ERR_IO = 3,
  CP_ERR_NUMERIC = 4,
  CP_ERR_INTERNAL = 5
} cp_status;

typedef struct cp_dataset cp_dataset;
typedef struct cp_model cp_model;
typedef struct cp_bank cp_bank;

CP_API const char* cp_last_error(void);
CP_API const char* cp_version(void);

/* 0 = hardware concurrency. Results do not depend on this setting. */
CP_API void cp_set_threads(unsigned threads);

/* ---- datasets ---------------------------------------------------------- */

typedef struct cp_generate_params {
  uint64_t count;           /* number of trajectories */
  uint32_t obs_len;         /* Mo */
  uint32_t pred_len;        /* Np */
  double symbol_duration_s; /* T_S */
  double carrier_hz;        /* f_c */
  double velocity_min_mps;
  double velocity_max_mps;
  uint32_t n_paths; /* sinusoids per trajectory, 0 = default (64) */
  uint64_t seed;
  uint64_t train_count; /* recorded split index; must not exceed count */
  int normalize;        /* nonzero: scale to average energy Mo+Np */
} cp_generate_params;

typedef struct cp_dataset_info {
  uint64_t count;
  uint32_t obs_len;
  uint32_t pred_len;
  double symbol_duration_s;
  int normalized;
  int has_split;
  uint64_t train_count;
  int has_carrier;
  double carrier_hz;
  uint64_t fingerprint;
} cp_dataset_info;

CP_API void cp_generate_params_default(cp_generate_params* params);
CP_API cp_status cp_dataset_generate(const cp_generate_params* params, cp_dataset** out);
CP_API cp_status cp_dataset_load(const char* path, cp_dataset** out);
CP_API cp_status cp_dataset_save(const cp_dataset* ds, const char* path);
CP_API cp_status cp_dataset_info_get(const cp_dataset* ds, cp_dataset_info* info);
/* Copies trajectory index's chronological coefficients into out (2*(Mo+Np) doubles). */
CP_API cp_status cp_dataset_trajectory(const cp_dataset* ds, uint64_t index, double* out, size_t out_len);
/* Splits at the recorded split index; both outputs are new handles. */
CP_API cp_status cp_dataset_split(const cp_dataset* ds, cp_dataset** train, cp_dataset** test);
CP_API void cp_dataset_free(cp_dataset* ds);

/* ---- mixture models ---------------------------------------------------- */

typedef enum cp_structure { CP_STRUCTURE_FULL = 0, CP_STRUCTURE_TOEPLITZ = 1 } cp_structure;

typedef struct cp_fit_params {
  uint32_t components; /* K */
  cp_structure structure;
  uint32_t max_iter;
  double tol_rel;
  uint64_t seed;
  double min_weight;
  double reg_covar; /* ridge prior strength relative to trace/dim; 0 = plain ML */
} cp_fit_params;

typedef struct cp_fit_summary {
  uint32_t iterations;
  int converged;
  double final_log_likelihood;
  uint32_t jitter_events;
  uint32_t reseed_events;
  uint32_t monotonicity_violations;
} cp_fit_summary;

typedef struct cp_model_info {
  uint32_t components;
  uint32_t dim;
  cp_structure structure;
} cp_model_info;

CP_API void cp_fit_params_default(cp_fit_params* params);
/* Fits on every trajectory of ds (which must be normalized). summary and
 * trace may be NULL; trace receives up to trace_cap log-likelihood values and
 * *trace_len their count. */
CP_API cp_status cp_model_fit(const cp_dataset* ds, const cp_fit_params* params, cp_model** out,
                              cp_fit_summary* summary, double* trace, size_t trace_cap, size_t* trace_len);
CP_API cp_status cp_model_load(const char* path, cp_model** out);
CP_API cp_status cp_model_save(const cp_model* model, const char* path);
CP_API cp_status cp_model_info_get(const cp_model* model, cp_model_info* info);
/* responsibilities given a noisy observation of the trailing obs_len coordinates */
CP_API cp_status cp_model_responsibilities(const cp_model* model, const double* y, size_t obs_len,
                                           double noise_var, double* resp, size_t resp_len);
CP_API void cp_model_free(cp_model* model);

/* ---- predictor banks ---------------------------------------------------- */

/* Precomputes the per-component filters for one noise variance and the given
 * prediction steps (each in [1, dim - obs_len]). */
CP_API cp_status cp_bank_build(const cp_model* model, uint32_t obs_len, const uint32_t* steps, size_t n_steps,
                               double noise_var, cp_bank** out);
/* out receives n_steps complex predictions (2*n_steps doubles); resp, when
 * non-NULL, receives the K responsibilities. noise_var must match the bank. */
CP_API cp_status cp_bank_predict(const cp_bank* bank, const double* y, size_t obs_len, double noise_var,
                                 double* out, size_t out_len, double* resp, size_t resp_len);
CP_API void cp_bank_free(cp_bank* bank);

/* noise variance 10^(-snr_db/10) for SNR = 1/sigma^2 */
CP_API double cp_noise_variance(double snr_db);

/* ---- sweeps -------------------------------------------------------------- */

typedef enum cp_axis { CP_AXIS_SNR = 0, CP_AXIS_COMPONENTS = 1, CP_AXIS_STEP = 2 } cp_axis;

typedef struct cp_sweep_params {
  cp_axis axis;
  uint32_t obs_len; /* 0: the test set's Mo */
  uint32_t step;    /* for SNR and K sweeps */
  double snr_db;    /* for K and step sweeps */
  uint32_t components;
  const double* snr_grid;
  size_t snr_grid_len;
  const uint32_t* k_grid;
  size_t k_grid_len;
  const uint32_t* step_grid;
  size_t step_grid_len;
  const char* methods; /* comma separated; NULL = all standard methods */
  const char* cache_dir; /* NULL = in-memory only */
  uint64_t seed;
  uint32_t bootstrap_resamples;
  cp_fit_params fit;
} cp_sweep_params;

typedef struct cp_sweep_summary {
  uint32_t fit_invocations;
  uint32_t cache_hits;
  uint32_t rows;
  uint32_t columns;
} cp_sweep_summary;

CP_API void cp_sweep_params_default(cp_sweep_params* params);
/* Evaluates the methods on test (fitting on train) and writes the CSV report. */
CP_API cp_status cp_sweep_run(const cp_dataset* train, const cp_dataset* test, const cp_sweep_params* params,
                              const char* csv_path, cp_sweep_summary* summary);

#ifdef __cplusplus
}
#endif

#endif /* CHANPRED_CHANPRED_H */
