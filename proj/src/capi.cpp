// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include "chanpred/chanpred.h"

#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "chanmodel.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "gmm.hpp"
#include "parallel.hpp"
#include "predict.hpp"

struct cp_dataset {
  chanpred::Dataset ds;
};

struct cp_model {
  chanpred::GmmModel model;
};

struct cp_bank {
  chanpred::PredictorBank bank;
};

namespace {

using namespace chanpred;

thread_local std::string g_last_error;

// Application default; the library's FitOptions default is plain ML.
constexpr double kDefaultRegCovar = 1e-6;

cp_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return CP_ERR_INVALID_ARGUMENT;
    case ErrorKind::Data: return CP_ERR_DATA;
    case ErrorKind::Io: return CP_ERR_IO;
    case ErrorKind::Numeric: return CP_ERR_NUMERIC;
  }
  return CP_ERR_INTERNAL;
}

template <typename F>
cp_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return CP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorKind::InvalidArgument, std::string(what) + " is NULL");
}

std::vector<cplx> read_complex(const double* p, std::size_t n) {
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {p[2 * i], p[2 * i + 1]};
  return out;
}

std::vector<std::string> split_names(const char* list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

FitOptions fit_options(const cp_fit_params& p) {
  FitOptions o;
  o.max_iter = p.max_iter;
  o.tol_rel = p.tol_rel;
  o.seed = p.seed;
  o.min_weight = p.min_weight;
  o.reg_covar = p.reg_covar;
  return o;
}

CovarianceStructure structure_of(cp_structure s) {
  if (s == CP_STRUCTURE_FULL) return CovarianceStructure::Full;
  if (s == CP_STRUCTURE_TOEPLITZ) return CovarianceStructure::Toeplitz;
  fail(ErrorKind::InvalidArgument, "unknown covariance structure " + std::to_string(static_cast<int>(s)));
}

template <typename T>
std::vector<T> grid(const T* p, std::size_t n, const char* what) {
  if (n == 0) fail(ErrorKind::InvalidArgument, std::string(what) + " is empty");
  need(p, what);
  return std::vector<T>(p, p + n);
}

}  // namespace

extern "C" {

const char* cp_last_error(void) { return g_last_error.c_str(); }

const char* cp_version(void) { return "1.0.0"; }

void cp_set_threads(unsigned threads) { set_thread_count(threads); }

void cp_generate_params_default(cp_generate_params* p) {
  if (p == nullptr) return;
  const DatasetSpec d;
  *p = cp_generate_params{};
  p->count = 0;
  p->obs_len = static_cast<std::uint32_t>(d.obs_len);
  p->pred_len = static_cast<std::uint32_t>(d.pred_len);
  p->symbol_duration_s = d.symbol_duration_s;
  p->carrier_hz = d.carrier_hz;
  p->velocity_min_mps = d.velocity_min_mps;
  p->velocity_max_mps = d.velocity_max_mps;
  p->n_paths = static_cast<std::uint32_t>(d.n_paths);
  p->seed = 0;
  p->train_count = 0;
  p->normalize = 1;
}

cp_status cp_dataset_generate(const cp_generate_params* params, cp_dataset** out) {
  return guarded([&] {
    need(params, "params");
    need(out, "out");
    *out = nullptr;
    require(params->train_count <= params->count, "train_count exceeds count");
    DatasetSpec spec;
    spec.count = params->count;
    spec.obs_len = params->obs_len;
    spec.pred_len = params->pred_len;
    spec.symbol_duration_s = params->symbol_duration_s;
    spec.carrier_hz = params->carrier_hz;
    spec.velocity_min_mps = params->velocity_min_mps;
    spec.velocity_max_mps = params->velocity_max_mps;
    spec.n_paths = params->n_paths == 0 ? kDefaultPaths : params->n_paths;
    spec.seed = params->seed;
    Dataset ds = generate_dataset(spec);
    if (params->normalize != 0) ds = normalize_dataset(std::move(ds));
    ds.train_count = static_cast<std::size_t>(params->train_count);
    *out = new cp_dataset{std::move(ds)};
  });
}

cp_status cp_dataset_load(const char* path, cp_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new cp_dataset{load_dataset(path)};
  });
}

cp_status cp_dataset_save(const cp_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    save_dataset(ds->ds, path);
  });
}

cp_status cp_dataset_info_get(const cp_dataset* ds, cp_dataset_info* info) {
  return guarded([&] {
    need(ds, "dataset");
    need(info, "info");
    const Dataset& d = ds->ds;
    *info = cp_dataset_info{};
    info->count = d.size();
    info->obs_len = static_cast<std::uint32_t>(d.obs_len);
    info->pred_len = static_cast<std::uint32_t>(d.pred_len);
    info->symbol_duration_s = d.trajectories.empty() ? 0.0 : d.symbol_duration_s();
    info->normalized = d.normalized ? 1 : 0;
    info->has_split = d.train_count.has_value() ? 1 : 0;
    info->train_count = d.train_count.value_or(0);
    info->has_carrier = d.carrier_hz.has_value() ? 1 : 0;
    info->carrier_hz = d.carrier_hz.value_or(0.0);
    info->fingerprint = dataset_fingerprint(d);
  });
}

cp_status cp_dataset_trajectory(const cp_dataset* ds, uint64_t index, double* out, size_t out_len) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    require(index < ds->ds.size(), "trajectory index out of range");
    const auto& c = ds->ds.trajectories[static_cast<std::size_t>(index)].coeffs;
    require(out_len >= 2 * c.size(), "output buffer too small");
    for (std::size_t i = 0; i < c.size(); ++i) {
      out[2 * i] = c[i].real();
      out[2 * i + 1] = c[i].imag();
    }
  });
}

cp_status cp_dataset_split(const cp_dataset* ds, cp_dataset** train, cp_dataset** test) {
  return guarded([&] {
    need(ds, "dataset");
    need(train, "train");
    need(test, "test");
    *train = nullptr;
    *test = nullptr;
    auto parts = split_dataset(ds->ds);
    auto* a = new cp_dataset{std::move(parts.first)};
    try {
      *test = new cp_dataset{std::move(parts.second)};
    } catch (...) {
      delete a;
      throw;
    }
    *train = a;
  });
}

void cp_dataset_free(cp_dataset* ds) { delete ds; }

void cp_fit_params_default(cp_fit_params* p) {
  if (p == nullptr) return;
  const FitOptions d;
  *p = cp_fit_params{};
  p->components = 128;
  p->structure = CP_STRUCTURE_FULL;
  p->max_iter = static_cast<std::uint32_t>(d.max_iter);
  p->tol_rel = d.tol_rel;
  p->seed = d.seed;
  p->min_weight = d.min_weight;
  p->reg_covar = kDefaultRegCovar;
}

cp_status cp_model_fit(const cp_dataset* ds, const cp_fit_params* params, cp_model** out, cp_fit_summary* summary,
                       double* trace, size_t trace_cap, size_t* trace_len) {
  return guarded([&] {
    need(ds, "dataset");
    need(params, "params");
    need(out, "out");
    *out = nullptr;
    FitResult r = fit_em(ds->ds, params->components, structure_of(params->structure), fit_options(*params));
    const auto& tr = r.report.log_likelihood_trace;
    if (summary != nullptr) {
      summary->iterations = static_cast<std::uint32_t>(r.report.iterations);
      summary->converged = r.report.converged ? 1 : 0;
      summary->final_log_likelihood = tr.empty() ? 0.0 : tr.back();
      summary->jitter_events = static_cast<std::uint32_t>(r.report.jitter_events);
      summary->reseed_events = static_cast<std::uint32_t>(r.report.reseed_events);
      summary->monotonicity_violations = static_cast<std::uint32_t>(r.report.monotonicity_violations);
    }
    if (trace != nullptr)
      for (std::size_t i = 0; i < tr.size() && i < trace_cap; ++i) trace[i] = tr[i];
    if (trace_len != nullptr) *trace_len = tr.size();
    *out = new cp_model{std::move(r.model)};
  });
}

cp_status cp_model_load(const char* path, cp_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new cp_model{load_model(path)};
  });
}

cp_status cp_model_save(const cp_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    save_model(model->model, path);
  });
}

cp_status cp_model_info_get(const cp_model* model, cp_model_info* info) {
  return guarded([&] {
    need(model, "model");
    need(info, "info");
    info->components = static_cast<std::uint32_t>(model->model.components());
    info->dim = static_cast<std::uint32_t>(model->model.dim);
    info->structure = model->model.structure == CovarianceStructure::Full ? CP_STRUCTURE_FULL : CP_STRUCTURE_TOEPLITZ;
  });
}

cp_status cp_model_responsibilities(const cp_model* model, const double* y, size_t obs_len, double noise_var,
                                    double* resp, size_t resp_len) {
  return guarded([&] {
    need(model, "model");
    need(y, "y");
    need(resp, "resp");
    require(resp_len >= model->model.components(), "responsibility buffer too small");
    NoisyObservation obs{read_complex(y, obs_len), noise_var};
    const auto r = responsibilities_noisy(model->model, obs);
    std::copy(r.begin(), r.end(), resp);
  });
}

void cp_model_free(cp_model* model) { delete model; }

cp_status cp_bank_build(const cp_model* model, uint32_t obs_len, const uint32_t* steps, size_t n_steps,
                        double noise_var, cp_bank** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    const auto s = grid(steps, n_steps, "steps");
    *out = new cp_bank{PredictorBank::build(model->model, obs_len, std::vector<std::size_t>(s.begin(), s.end()),
                                            noise_var)};
  });
}

cp_status cp_bank_predict(const cp_bank* bank, const double* y, size_t obs_len, double noise_var, double* out,
                          size_t out_len, double* resp, size_t resp_len) {
  return guarded([&] {
    need(bank, "bank");
    need(y, "y");
    need(out, "out");
    const PredictorBank& b = bank->bank;
    require(out_len >= 2 * b.steps().size(), "prediction buffer too small");
    if (resp != nullptr) require(resp_len >= b.components(), "responsibility buffer too small");
    NoisyObservation obs{read_complex(y, obs_len), noise_var};
    const auto pred = b.predict_steps(obs);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      out[2 * i] = pred[i].real();
      out[2 * i + 1] = pred[i].imag();
    }
    if (resp != nullptr) {
      const auto r = b.responsibilities(obs);
      std::copy(r.begin(), r.end(), resp);
    }
  });
}

void cp_bank_free(cp_bank* bank) { delete bank; }

double cp_noise_variance(double snr_db) { return noise_variance(snr_db); }

void cp_sweep_params_default(cp_sweep_params* p) {
  if (p == nullptr) return;
  const SweepSettings d;
  *p = cp_sweep_params{};
  p->axis = CP_AXIS_SNR;
  p->obs_len = 0;
  p->step = static_cast<std::uint32_t>(d.step);
  p->snr_db = d.snr_db;
  p->components = static_cast<std::uint32_t>(d.components);
  p->seed = d.seed;
  p->bootstrap_resamples = static_cast<std::uint32_t>(d.bootstrap_resamples);
  cp_fit_params_default(&p->fit);
}

cp_status cp_sweep_run(const cp_dataset* train, const cp_dataset* test, const cp_sweep_params* params,
                       const char* csv_path, cp_sweep_summary* summary) {
  return guarded([&] {
    need(train, "train");
    need(test, "test");
    need(params, "params");
    need(csv_path, "csv_path");
    SweepSettings s;
    s.obs_len = params->obs_len;
    s.step = params->step;
    s.snr_db = params->snr_db;
    s.components = params->components;
    s.seed = params->seed;
    s.bootstrap_resamples = params->bootstrap_resamples;
    if (params->methods != nullptr) s.methods = split_names(params->methods);
    require(!s.methods.empty(), "method list is empty");

    ModelCache cache(params->cache_dir != nullptr && params->cache_dir[0] != '\0'
                         ? std::optional<std::filesystem::path>(params->cache_dir)
                         : std::nullopt);
    const FitOptions fit = fit_options(params->fit);
    SweepReport report;
    switch (params->axis) {
      case CP_AXIS_SNR: {
        const auto g = grid(params->snr_grid, params->snr_grid_len, "snr_grid");
        report = sweep_snr(train->ds, test->ds, cache, fit, s, g);
        break;
      }
      case CP_AXIS_COMPONENTS: {
        const auto g = grid(params->k_grid, params->k_grid_len, "k_grid");
        const std::vector<std::size_t> k(g.begin(), g.end());
        report = sweep_components(train->ds, test->ds, cache, fit, s, k);
        break;
      }
      case CP_AXIS_STEP: {
        const auto g = grid(params->step_grid, params->step_grid_len, "step_grid");
        const std::vector<std::size_t> st(g.begin(), g.end());
        report = sweep_step(train->ds, test->ds, cache, fit, s, st);
        break;
      }
      default:
        fail(ErrorKind::InvalidArgument, "unknown sweep axis " + std::to_string(static_cast<int>(params->axis)));
    }
    report.write_csv(csv_path);
    if (summary != nullptr) {
      summary->fit_invocations = static_cast<std::uint32_t>(cache.fit_invocations());
      summary->cache_hits = static_cast<std::uint32_t>(cache.hits());
      summary->rows = static_cast<std::uint32_t>(report.axis_values.size());
      summary->columns = static_cast<std::uint32_t>(report.methods.size());
    }
  });
}

}  // extern "C"
