// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// Monte-Carlo evaluation: MSE of predictors on a test set, sweeps over SNR,
// mixture size and prediction step, and CSV reports.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chanmodel.hpp"
#include "gmm.hpp"
#include "predict.hpp"

namespace chanpred {

/// A predictor sees the test trajectory's metadata (velocity, symbol
/// duration) and the noisy observation; it must not read the coefficients.
using PredictFn = std::function<cplx(const Trajectory&, const NoisyObservation&)>;

struct EvalSettings {
  std::size_t obs_len = 0;
  std::size_t step = 1;
  double snr_db = 20.0;
  std::uint64_t seed = 0;
  std::size_t bootstrap_resamples = 200;
};

struct EvalResult {
  double mse = 0.0;
  double se = 0.0;              // bootstrap standard error of mse
  std::vector<double> errors;  // per-trajectory squared error
};

/// Noise for trajectory t is drawn from derive_seed(seed, t), so every method
/// and every SNR point sees the same standardized noise.
std::uint64_t noise_seed(std::uint64_t seed, std::size_t index);

/// Mean squared error of h[Mo-1+step]. With several variants the per-sample
/// error is the average over variants.
EvalResult evaluate_mse(std::span<const PredictFn> variants, const Dataset& test, const EvalSettings& s);
EvalResult evaluate_mse(const PredictFn& fn, const Dataset& test, const EvalSettings& s);

double bootstrap_se(std::span<const double> errors, std::size_t resamples, std::uint64_t seed);
/// Bootstrap standard error of mean(a) - mean(b) for paired samples.
double paired_difference_se(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                            std::uint64_t seed);

struct PointContext {
  double noise_var = 0.0;
  std::size_t obs_len = 0;
  std::size_t step = 1;
};

/// A named column of a sweep. prepare() is called once per axis point and
/// returns the predictor variant(s) for that point.
struct Method {
  std::string name;
  std::function<std::vector<PredictFn>(const PointContext&)> prepare;
};

/// Fitted models keyed by (dataset fingerprint, K, structure, seed, other fit
/// options), kept in
/// memory and optionally in a cache directory.
class ModelCache {
 public:
  explicit ModelCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::shared_ptr<const GmmModel> get(const Dataset& train, std::size_t components, CovarianceStructure structure,
                                      const FitOptions& opts);

  std::size_t fit_invocations() const { return fits_; }
  std::size_t hits() const { return hits_; }
  /// Reports of the fits this cache ran, in order.
  const std::vector<FitReport>& fit_reports() const { return reports_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::map<std::string, std::shared_ptr<const GmmModel>> memory_;
  std::size_t fits_ = 0;
  std::size_t hits_ = 0;
  std::vector<FitReport> reports_;
  std::mutex mutex_;
};

inline constexpr const char* kMethodGmm = "gmm";
inline constexpr const char* kMethodGmmToeplitz = "gmm-toeplitz";
inline constexpr const char* kMethodSample = "lmmse-sample";
inline constexpr const char* kMethodJakes = "jakes-perfect";
inline constexpr const char* kMethodJakes10 = "jakes-10";
inline constexpr const char* kMethodJakes20 = "jakes-20";

std::vector<std::string> standard_method_names();

Method gmm_method(std::string name, std::shared_ptr<const GmmModel> model);
Method sample_cov_method(const Dataset& train);
/// pct = 0 uses the true velocity; otherwise both v(1 + pct/100) and
/// v(1 - pct/100) are evaluated and their errors averaged.
Method jakes_method(std::string name, double carrier_hz, double pct);

enum class SweepAxis { Snr, Components, Step };
const char* axis_name(SweepAxis a);

struct SweepCell {
  double mse = 0.0;
  double se = 0.0;
  std::vector<double> errors;
};

struct SweepReport {
  SweepAxis axis = SweepAxis::Snr;
  std::vector<double> axis_values;
  std::vector<std::string> methods;
  std::vector<std::vector<SweepCell>> cells;  // [axis point][method]

  std::size_t obs_len = 0;
  std::size_t pred_len = 0;
  std::string steps;  // "1" or "1,2,3,4"
  std::string components;
  std::size_t test_count = 0;
  std::uint64_t seed = 0;
  std::optional<double> snr_db;  // fixed SNR for non-SNR axes

  std::size_t column(const std::string& method) const;
  const SweepCell& cell(std::size_t row, const std::string& method) const;
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

struct SweepSettings {
  std::size_t obs_len = 0;  // 0: use the test set's Mo
  std::size_t step = 1;
  double snr_db = 20.0;
  std::size_t components = 128;
  std::uint64_t seed = 0;
  std::size_t bootstrap_resamples = 200;
  std::vector<std::string> methods = standard_method_names();
};

/// Methods by name over a training set; GMM columns are fitted through the cache.
std::vector<Method> build_methods(const std::vector<std::string>& names, const Dataset& train, const Dataset& test,
                                  ModelCache& cache, std::size_t components, const FitOptions& fit);

SweepReport sweep_snr(const std::vector<Method>& methods, const Dataset& test, const SweepSettings& s,
                      std::span<const double> snr_grid);

SweepReport sweep_snr(const Dataset& train, const Dataset& test, ModelCache& cache, const FitOptions& fit,
                      const SweepSettings& s, std::span<const double> snr_grid);

/// GMM columns refitted (or cached) per K; baselines evaluated once and
/// repeated on every row.
SweepReport sweep_components(const Dataset& train, const Dataset& test, ModelCache& cache, const FitOptions& fit,
                             const SweepSettings& s, std::span<const std::size_t> k_grid);

/// One fit per GMM structure, reused for every step.
SweepReport sweep_step(const Dataset& train, const Dataset& test, ModelCache& cache, const FitOptions& fit,
                       const SweepSettings& s, std::span<const std::size_t> step_grid);

}  // namespace chanpred
