// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// chanpred command line: generate / fit / sweep / predict.
// Exit codes: 0 ok, 2 config or usage error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chanpred/chanpred.h"
#include "run_config.hpp"

namespace {

using chanpred::cli::ConfigError;
using chanpred::cli::RunConfig;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Failure {
  int code;
  std::string message;
};

int exit_code(cp_status s) {
  switch (s) {
    case CP_OK: return 0;
    case CP_ERR_INVALID_ARGUMENT: return kExitConfig;
    case CP_ERR_DATA:
    case CP_ERR_IO: return kExitData;
    case CP_ERR_NUMERIC: return kExitNumeric;
    default: return 1;
  }
}

void check(cp_status s, const std::string& what) {
  if (s != CP_OK) throw Failure{exit_code(s), what + ": " + cp_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};
using DatasetHandle = Handle<cp_dataset, cp_dataset_free>;
using ModelHandle = Handle<cp_model, cp_model_free>;
using BankHandle = Handle<cp_bank, cp_bank_free>;

cp_fit_params fit_params(const RunConfig& c, std::uint32_t k) {
  cp_fit_params p;
  cp_fit_params_default(&p);
  p.components = k;
  p.structure = c.structure == "toeplitz" ? CP_STRUCTURE_TOEPLITZ : CP_STRUCTURE_FULL;
  p.max_iter = c.max_iter;
  p.tol_rel = c.tol_rel;
  p.seed = c.seed;
  p.min_weight = c.min_weight;
  p.reg_covar = c.reg_covar;
  return p;
}

void split_loaded(const std::string& path, DatasetHandle& train, DatasetHandle& test) {
  DatasetHandle all;
  check(cp_dataset_load(path.c_str(), &all.p), "loading dataset");
  cp_dataset_info info;
  check(cp_dataset_info_get(all.p, &info), "dataset info");
  if (!info.has_split)
    throw Failure{kExitData, "dataset '" + path + "' has no recorded train/test split; refusing to fit"};
  check(cp_dataset_split(all.p, &train.p, &test.p), "splitting dataset");
}

int cmd_generate(const RunConfig& c) {
  cp_generate_params p;
  cp_generate_params_default(&p);
  p.count = c.j_train + c.t_test;
  p.obs_len = c.mo;
  p.pred_len = c.np;
  p.symbol_duration_s = c.ts_s;
  p.carrier_hz = c.fc_hz;
  p.velocity_min_mps = c.velocity_min_mps;
  p.velocity_max_mps = c.velocity_max_mps;
  p.n_paths = c.n_paths;
  p.seed = c.seed;
  p.train_count = c.j_train;
  p.normalize = 1;
  DatasetHandle ds;
  check(cp_dataset_generate(&p, &ds.p), "generating dataset");
  check(cp_dataset_save(ds.p, c.dataset.c_str()), "writing dataset");
  std::printf("generate: J=%" PRIu64 " train=%" PRIu64 " test=%" PRIu64 " MO=%u NP=%u -> %s\n", p.count, c.j_train,
              c.t_test, c.mo, c.np, c.dataset.c_str());
  return 0;
}

int cmd_fit(const RunConfig& c) {
  DatasetHandle train, test;
  split_loaded(c.dataset, train, test);
  const cp_fit_params p = fit_params(c, c.k);
  std::vector<double> trace(c.max_iter + 2);
  std::size_t trace_len = 0;
  cp_fit_summary s;
  ModelHandle model;
  check(cp_model_fit(train.p, &p, &model.p, &s, trace.data(), trace.size(), &trace_len), "fitting");
  check(cp_model_save(model.p, c.model.c_str()), "writing model");
  trace.resize(std::min(trace_len, trace.size()));

  char line[512];
  std::snprintf(line, sizeof line,
                "fit: K=%u structure=%s iterations=%u converged=%d final_log_likelihood=%.17g jitter_events=%u "
                "reseed_events=%u monotonicity_violations=%u -> %s\n",
                p.components, c.structure.c_str(), s.iterations, s.converged, s.final_log_likelihood,
                s.jitter_events, s.reseed_events, s.monotonicity_violations, c.model.c_str());
  std::fputs(line, stdout);

  const std::string log_path = c.model + ".log";
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw Failure{kExitData, "cannot write fit log '" + log_path + "'"};
  log << line;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "ll[%zu] = %.17g\n", i, trace[i]);
    log << buf;
  }
  return 0;
}

int cmd_sweep(const RunConfig& c, const std::string& axis) {
  DatasetHandle train, test;
  split_loaded(c.dataset, train, test);

  cp_sweep_params p;
  cp_sweep_params_default(&p);
  p.axis = axis == "snr" ? CP_AXIS_SNR : axis == "k" ? CP_AXIS_COMPONENTS : CP_AXIS_STEP;
  p.obs_len = c.mo;
  p.step = c.ell;
  p.snr_db = c.snr_db;
  p.components = c.k;
  p.snr_grid = c.snr_grid.data();
  p.snr_grid_len = c.snr_grid.size();
  p.k_grid = c.k_grid.data();
  p.k_grid_len = c.k_grid.size();
  const auto ells = c.effective_ell_grid();
  p.step_grid = ells.data();
  p.step_grid_len = ells.size();
  p.methods = c.methods.empty() ? nullptr : c.methods.c_str();
  p.cache_dir = c.cache_dir.empty() ? nullptr : c.cache_dir.c_str();
  p.seed = c.seed;
  p.bootstrap_resamples = c.bootstrap;
  p.fit = fit_params(c, c.k);

  cp_sweep_summary s;
  check(cp_sweep_run(train.p, test.p, &p, c.report.c_str(), &s), "sweep");
  std::printf("sweep: axis=%s rows=%u methods=%u fits=%u cache_hits=%u -> %s\n", axis.c_str(), s.rows, s.columns,
              s.fit_invocations, s.cache_hits, c.report.c_str());
  return 0;
}

// Observation file: "CPOBS v1 MO=<n>" then 2n floats (re im pairs), newest first.
std::vector<double> read_observation(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitData, "cannot open observation file '" + path + "'"};
  std::string header;
  std::getline(in, header);
  unsigned mo = 0;
  if (std::sscanf(header.c_str(), "CPOBS v1 MO=%u", &mo) != 1 || mo == 0)
    throw Failure{kExitData, "observation file '" + path + "': malformed header"};
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(x))
      throw Failure{kExitData, "observation file '" + path + "': bad value '" + tok + "'"};
    v.push_back(x);
  }
  if (v.size() != 2 * std::size_t{mo})
    throw Failure{kExitData, "observation file '" + path + "': expected " + std::to_string(2 * mo) + " values, got " +
                                 std::to_string(v.size())};
  return v;
}

int cmd_predict(const RunConfig& c, const std::string& obs_path) {
  ModelHandle model;
  check(cp_model_load(c.model.c_str(), &model.p), "loading model");
  cp_model_info info;
  check(cp_model_info_get(model.p, &info), "model info");
  const std::vector<double> y = read_observation(obs_path);
  const std::size_t mo = y.size() / 2;
  const double noise_var = cp_noise_variance(c.snr_db);
  const std::uint32_t step = c.ell;

  BankHandle bank;
  check(cp_bank_build(model.p, static_cast<std::uint32_t>(mo), &step, 1, noise_var, &bank.p), "building filters");
  double pred[2];
  std::vector<double> resp(info.components);
  check(cp_bank_predict(bank.p, y.data(), mo, noise_var, pred, 2, resp.data(), resp.size()), "predicting");

  std::printf("prediction %.17g %.17g\n", pred[0], pred[1]);
  std::vector<std::size_t> order(resp.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return resp[a] > resp[b]; });
  for (std::size_t i = 0; i < std::min<std::size_t>(3, order.size()); ++i)
    std::printf("responsibility %zu %.17g\n", order[i], resp[order[i]]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chanpred: GMM-based channel prediction benchmark"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> threads;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "run configuration file (key = value)");
  app.add_option("--seed", seed, "random seed (overrides config)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores (overrides config)");
  app.add_option("--set", overrides, "override a config key, key=value (repeatable)");

  std::string dataset, model, report, cache_dir, obs_path, axis = "snr";
  std::optional<std::uint32_t> ell;
  std::optional<double> snr_db;

  auto* gen = app.add_subcommand("generate", "write a normalized synthetic dataset with a train/test split");
  gen->add_option("--out", dataset, "dataset path");

  auto* fit = app.add_subcommand("fit", "fit a GMM on the training split");
  fit->add_option("--dataset", dataset, "dataset path");
  fit->add_option("--out", model, "model path");

  auto* sweep = app.add_subcommand("sweep", "evaluate all methods over an axis and write a CSV report");
  sweep->add_option("--axis", axis, "snr | k | step")->check(CLI::IsMember({"snr", "k", "step"}));
  sweep->add_option("--dataset", dataset, "dataset path");
  sweep->add_option("--out", report, "report path");
  sweep->add_option("--cache-dir", cache_dir, "model cache directory");

  auto* pred = app.add_subcommand("predict", "predict one coefficient from an observation file");
  pred->add_option("--model", model, "model path");
  pred->add_option("--obs", obs_path, "observation file")->required();
  pred->add_option("--ell", ell, "prediction step");
  pred->add_option("--snr-db", snr_db, "observation SNR in dB");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : chanpred::cli::load_config(config_path);
    for (const auto& o : overrides) chanpred::cli::apply_override(cfg, o);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!dataset.empty()) cfg.dataset = dataset;
    if (!model.empty()) cfg.model = model;
    if (!report.empty()) cfg.report = report;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    if (ell) cfg.ell = *ell;
    if (snr_db) cfg.snr_db = *snr_db;
    chanpred::cli::validate(cfg);
    cp_set_threads(cfg.threads);

    if (gen->parsed()) return cmd_generate(cfg);
    if (fit->parsed()) return cmd_fit(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg, axis);
    return cmd_predict(cfg, obs_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "chanpred: config error: %s\n", e.what());
    return kExitConfig;
  } catch (const Failure& f) {
    std::fprintf(stderr, "chanpred: %s\n", f.message.c_str());
    return f.code;
  }
}
