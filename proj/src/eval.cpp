// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include "eval.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "error.hpp"
#include "parallel.hpp"

namespace chanpred {

std::uint64_t noise_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, index); }

namespace {

constexpr std::size_t kEvalChunk = 256;

std::string fmt10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(std::span<const std::size_t> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// Fit options other than the seed change the fitted model, so they are
// part of the cache key as well.
std::uint64_t options_hash(const FitOptions& o) {
  std::uint64_t h = mix_seed(o.max_iter);
  for (double v : {o.tol_rel, o.min_weight, o.reg_covar}) h = mix_seed(h ^ std::bit_cast<std::uint64_t>(v));
  return mix_seed(h ^ o.kmeans_iter);
}

bool is_gmm(const std::string& n) { return n == kMethodGmm || n == kMethodGmmToeplitz; }

CovarianceStructure gmm_structure(const std::string& n) {
  return n == kMethodGmm ? CovarianceStructure::Full : CovarianceStructure::Toeplitz;
}

SweepCell evaluate_cell(const Method& m, const Dataset& test, const EvalSettings& es) {
  const PointContext ctx{noise_variance(es.snr_db), es.obs_len, es.step};
  const std::vector<PredictFn> variants = m.prepare(ctx);
  EvalResult r = evaluate_mse(variants, test, es);
  return {r.mse, r.se, std::move(r.errors)};
}

EvalSettings eval_settings(const SweepSettings& s, const Dataset& test) {
  EvalSettings es;
  es.obs_len = s.obs_len ? s.obs_len : test.obs_len;
  es.step = s.step;
  es.snr_db = s.snr_db;
  es.seed = s.seed;
  es.bootstrap_resamples = s.bootstrap_resamples;
  return es;
}

SweepReport report_shell(SweepAxis axis, const Dataset& test, const SweepSettings& s) {
  SweepReport rep;
  rep.axis = axis;
  rep.methods = s.methods;
  rep.obs_len = s.obs_len ? s.obs_len : test.obs_len;
  rep.pred_len = test.pred_len;
  rep.steps = std::to_string(s.step);
  rep.components = std::to_string(s.components);
  rep.test_count = test.size();
  rep.seed = s.seed;
  if (axis != SweepAxis::Snr) rep.snr_db = s.snr_db;
  return rep;
}

}  // namespace

EvalResult evaluate_mse(std::span<const PredictFn> variants, const Dataset& test, const EvalSettings& s) {
  if (test.trajectories.empty()) fail(ErrorKind::InvalidArgument, "evaluate_mse: empty test set");
  require(!variants.empty(), "evaluate_mse: no predictor given");
  require(s.obs_len >= 1 && s.step >= 1, "evaluate_mse: Mo and step must be positive");
  const std::size_t target = s.obs_len - 1 + s.step;
  for (const Trajectory& t : test.trajectories)
    if (t.coeffs.size() <= target)
      fail(ErrorKind::InvalidArgument, "evaluate_mse: test trajectory shorter than Mo + step");

  const std::size_t n = test.size();
  EvalResult out;
  out.errors.assign(n, 0.0);
  const std::size_t chunks = (n + kEvalChunk - 1) / kEvalChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kEvalChunk);
    for (std::size_t i = c * kEvalChunk; i < end; ++i) {
      const Trajectory& t = test.trajectories[i];
      const NoisyObservation y = add_awgn(t, s.obs_len, s.snr_db, noise_seed(s.seed, i));
      const cplx truth = t.coeffs[target];
      double err = 0.0;
      for (const PredictFn& f : variants) err += std::norm(truth - f(t, y));
      out.errors[i] = err / static_cast<double>(variants.size());
    }
  });

  double sum = 0.0;
  for (double e : out.errors) sum += e;
  out.mse = sum / static_cast<double>(n);
  out.se = bootstrap_se(out.errors, s.bootstrap_resamples, s.seed);
  return out;
}

EvalResult evaluate_mse(const PredictFn& fn, const Dataset& test, const EvalSettings& s) {
  return evaluate_mse(std::span<const PredictFn>(&fn, 1), test, s);
}

double bootstrap_se(std::span<const double> errors, std::size_t resamples, std::uint64_t seed) {
  const std::size_t n = errors.size();
  if (n < 2 || resamples < 2) return 0.0;
  std::mt19937_64 rng(mix_seed(seed ^ 0xb0075742ULL));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += errors[pick(rng)];
    m = s / static_cast<double>(n);
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(resamples);
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  return std::sqrt(var / static_cast<double>(resamples - 1));
}

double paired_difference_se(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                            std::uint64_t seed) {
  require(a.size() == b.size(), "paired_difference_se: sample sizes differ");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return bootstrap_se(diff, resamples, seed);
}

ModelCache::ModelCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) {
    std::error_code ec;
    std::filesystem::create_directories(*dir_, ec);
    if (ec) fail(ErrorKind::Io, "cannot create cache directory '" + dir_->string() + "'");
  }
}

std::shared_ptr<const GmmModel> ModelCache::get(const Dataset& train, std::size_t components,
                                                CovarianceStructure structure, const FitOptions& opts) {
  char key[160];
  std::snprintf(key, sizeof key, "%016" PRIx64 "_K%zu_%s_s%" PRIu64 "_o%016" PRIx64, dataset_fingerprint(train),
                components, structure_name(structure), opts.seed, options_hash(opts));
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) {
    ++hits_;
    return it->second;
  }
  std::optional<std::filesystem::path> file;
  if (dir_) {
    file = *dir_ / (std::string(key) + ".cpgmm");
    if (std::filesystem::exists(*file)) {
      auto model = std::make_shared<const GmmModel>(load_model(*file));
      memory_.emplace(key, model);
      ++hits_;
      return model;
    }
  }
  FitResult fitted = fit_em(train, components, structure, opts);
  reports_.push_back(fitted.report);
  auto model = std::make_shared<const GmmModel>(std::move(fitted.model));
  ++fits_;
  if (file) save_model(*model, *file);
  memory_.emplace(key, model);
  return model;
}

std::vector<std::string> standard_method_names() {
  return {kMethodGmm, kMethodGmmToeplitz, kMethodSample, kMethodJakes, kMethodJakes10, kMethodJakes20};
}

Method gmm_method(std::string name, std::shared_ptr<const GmmModel> model) {
  return {std::move(name), [model](const PointContext& ctx) {
            auto bank = std::make_shared<const PredictorBank>(
                PredictorBank::build(*model, ctx.obs_len, {ctx.step}, ctx.noise_var));
            return std::vector<PredictFn>{
                [bank](const Trajectory&, const NoisyObservation& y) { return predict_gmm(*bank, y); }};
          }};
}

Method sample_cov_method(const Dataset& train) {
  auto base = std::make_shared<const BaselineCov>(sample_baseline(train));
  return {kMethodSample, [base](const PointContext& ctx) {
            BaselineCov b = *base;
            require(ctx.obs_len <= static_cast<std::size_t>(b.cov.rows()),
                    "sample covariance baseline: Mo exceeds the trajectory dimension");
            b.obs_len = ctx.obs_len;
            auto p = std::make_shared<const LinearPredictor>(baseline_predictor(b, ctx.step, ctx.noise_var));
            return std::vector<PredictFn>{
                [p](const Trajectory&, const NoisyObservation& y) { return p->predict(y); }};
          }};
}

Method jakes_method(std::string name, double carrier_hz, double pct) {
  return {std::move(name), [carrier_hz, pct](const PointContext& ctx) {
            auto make = [carrier_hz, ctx](int sign, double p) -> PredictFn {
              return [=](const Trajectory& t, const NoisyObservation& y) {
                if (!t.velocity_mps)
                  fail(ErrorKind::Data, "Jakes baseline needs per-trajectory velocity metadata");
                const double v = p == 0.0 ? *t.velocity_mps : perturb_velocity(*t.velocity_mps, p, sign);
                const BaselineCov cov = jakes_covariance(ctx.obs_len, ctx.step, t.symbol_duration_s, carrier_hz, v);
                return jakes_predictor(cov, ctx.step, ctx.noise_var).predict(y);
              };
            };
            if (pct == 0.0) return std::vector<PredictFn>{make(1, 0.0)};
            return std::vector<PredictFn>{make(1, pct), make(-1, pct)};
          }};
}

const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Snr: return "snr_db";
    case SweepAxis::Components: return "components";
    case SweepAxis::Step: return "step";
  }
  return "?";
}

std::size_t SweepReport::column(const std::string& method) const {
  const auto it = std::find(methods.begin(), methods.end(), method);
  if (it == methods.end()) fail(ErrorKind::InvalidArgument, "report has no column '" + method + "'");
  return static_cast<std::size_t>(it - methods.begin());
}

const SweepCell& SweepReport::cell(std::size_t row, const std::string& method) const {
  return cells.at(row).at(column(method));
}

std::string SweepReport::to_csv() const {
  std::ostringstream out;
  out << "# axis=" << axis_name(axis) << '\n'
      << "# mo=" << obs_len << '\n'
      << "# np=" << pred_len << '\n'
      << "# ell=" << steps << '\n'
      << "# k=" << components << '\n'
      << "# t=" << test_count << '\n'
      << "# seed=" << seed << '\n';
  if (snr_db) out << "# snr_db=" << fmt10(*snr_db) << '\n';
  out << "axis";
  for (const auto& m : methods) out << ',' << m << ',' << m << "_se";
  out << '\n';
  for (std::size_t r = 0; r < axis_values.size(); ++r) {
    out << fmt10(axis_values[r]);
    for (const SweepCell& c : cells[r]) out << ',' << fmt10(c.mse) << ',' << fmt10(c.se);
    out << '\n';
  }
  return out.str();
}

void SweepReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << to_csv();
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::vector<Method> build_methods(const std::vector<std::string>& names, const Dataset& train, const Dataset& test,
                                  ModelCache& cache, std::size_t components, const FitOptions& fit) {
  std::vector<Method> out;
  for (const std::string& n : names) {
    if (is_gmm(n)) {
      out.push_back(gmm_method(n, cache.get(train, components, gmm_structure(n), fit)));
    } else if (n == kMethodSample) {
      out.push_back(sample_cov_method(train));
    } else if (n == kMethodJakes || n == kMethodJakes10 || n == kMethodJakes20) {
      const auto fc = test.carrier_hz ? test.carrier_hz : train.carrier_hz;
      if (!fc) fail(ErrorKind::Data, "Jakes baselines need the carrier frequency in the dataset metadata");
      const double pct = n == kMethodJakes ? 0.0 : (n == kMethodJakes10 ? 10.0 : 20.0);
      out.push_back(jakes_method(n, *fc, pct));
    } else {
      fail(ErrorKind::InvalidArgument, "unknown method '" + n + "'");
    }
  }
  return out;
}

SweepReport sweep_snr(const std::vector<Method>& methods, const Dataset& test, const SweepSettings& s,
                      std::span<const double> snr_grid) {
  require(!snr_grid.empty(), "sweep_snr: empty SNR grid");
  SweepReport rep = report_shell(SweepAxis::Snr, test, s);
  rep.methods.clear();
  for (const Method& m : methods) rep.methods.push_back(m.name);
  for (double snr : snr_grid) {
    EvalSettings es = eval_settings(s, test);
    es.snr_db = snr;
    rep.axis_values.push_back(snr);
    std::vector<SweepCell> row;
    for (const Method& m : methods) row.push_back(evaluate_cell(m, test, es));
    rep.cells.push_back(std::move(row));
  }
  return rep;
}

SweepReport sweep_snr(const Dataset& train, const Dataset& test, ModelCache& cache, const FitOptions& fit,
                      const SweepSettings& s, std::span<const double> snr_grid) {
  const auto methods = build_methods(s.methods, train, test, cache, s.components, fit);
  return sweep_snr(methods, test, s, snr_grid);
}

SweepReport sweep_components(const Dataset& train, const Dataset& test, ModelCache& cache, const FitOptions& fit,
                             const SweepSettings& s, std::span<const std::size_t> k_grid) {
  require(!k_grid.empty(), "sweep_components: empty K grid");
  SweepReport rep = report_shell(SweepAxis::Components, test, s);
  rep.components = join(k_grid);
  const EvalSettings es = eval_settings(s, test);

  std::vector<std::string> baseline_names;
  for (const auto& n : s.methods)
    if (!is_gmm(n)) baseline_names.push_back(n);
  const auto baselines = build_methods(baseline_names, train, test, cache, s.components, fit);
  std::map<std::string, SweepCell> fixed;
  for (const Method& m : baselines) fixed.emplace(m.name, evaluate_cell(m, test, es));

  for (std::size_t k : k_grid) {
    rep.axis_values.push_back(static_cast<double>(k));
    std::vector<SweepCell> row;
    for (const auto& n : s.methods) {
      if (is_gmm(n)) {
        const Method m = gmm_method(n, cache.get(train, k, gmm_structure(n), fit));
        row.push_back(evaluate_cell(m, test, es));
      } else {
        row.push_back(fixed.at(n));
      }
    }
    rep.cells.push_back(std::move(row));
  }
  return rep;
}

SweepReport sweep_step(const Dataset& train, const Dataset& test, ModelCache& cache, const FitOptions& fit,
                       const SweepSettings& s, std::span<const std::size_t> step_grid) {
  require(!step_grid.empty(), "sweep_step: empty step grid");
  SweepReport rep = report_shell(SweepAxis::Step, test, s);
  rep.steps = join(step_grid);
  const auto methods = build_methods(s.methods, train, test, cache, s.components, fit);
  for (std::size_t step : step_grid) {
    EvalSettings es = eval_settings(s, test);
    es.step = step;
    rep.axis_values.push_back(static_cast<double>(step));
    std::vector<SweepCell> row;
    for (const Method& m : methods) row.push_back(evaluate_cell(m, test, es));
    rep.cells.push_back(std::move(row));
  }
  return rep;
}

}  // namespace chanpred
