// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include "predict.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bessel.hpp"
#include "error.hpp"
#include "gauss.hpp"
#include "parallel.hpp"

namespace chanpred {

std::size_t future_position(std::size_t dim, std::size_t obs_len, std::size_t step) {
  require(obs_len >= 1 && obs_len <= dim, "future_position: Mo must be in [1, dim]");
  if (step < 1 || step > dim - obs_len)
    fail(ErrorKind::InvalidArgument, "prediction step " + std::to_string(step) + " outside [1, " +
                                         std::to_string(dim - obs_len) + "]");
  return dim - obs_len - step;
}

std::vector<double> index_selector(std::size_t obs_len, std::size_t pred_len, std::size_t step) {
  std::vector<double> e(obs_len + pred_len, 0.0);
  e[future_position(obs_len + pred_len, obs_len, step)] = 1.0;
  return e;
}

namespace {

CVector observation_vector(const NoisyObservation& y) {
  return Eigen::Map<const CVector>(y.values.data(), static_cast<Eigen::Index>(y.size()));
}

void check_noise_var(double noise_var) {
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
    fail(ErrorKind::InvalidArgument, "noise variance must be finite and nonnegative");
}

double log_weight(double w) {
  return w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity();
}

}  // namespace

PredictorBank PredictorBank::build(const GmmModel& model, std::size_t obs_len, std::vector<std::size_t> steps,
                                   double noise_var) {
  require(!steps.empty(), "PredictorBank: at least one prediction step required");
  check_noise_var(noise_var);
  for (std::size_t s : steps) future_position(model.dim, obs_len, s);

  PredictorBank bank;
  bank.dim_ = model.dim;
  bank.obs_len_ = obs_len;
  bank.steps_ = std::move(steps);
  bank.noise_var_ = noise_var;
  bank.parts_.resize(model.components());

  const auto mo = static_cast<Eigen::Index>(obs_len);
  const auto obs_begin = static_cast<Eigen::Index>(model.dim) - mo;
  const double log_pi_mo = static_cast<double>(mo) * std::log(std::numbers::pi);
  parallel_for(model.components(), [&](std::size_t k) {
    const CMatrix cov = model.covariance(k);
    CMatrix inner = cov.bottomRightCorner(mo, mo);
    inner.diagonal().array() += noise_var;
    const PsdFactor factor = cholesky_psd(inner);

    Component& part = bank.parts_[k];
    part.obs_mean = model.means[k].tail(mo);
    part.obs_chol = factor.lower;
    part.log_norm = log_weight(model.weights[k]) - log_pi_mo - factor.log_det();

    const auto n_steps = static_cast<Eigen::Index>(bank.steps_.size());
    CMatrix cross(mo, n_steps);
    for (Eigen::Index s = 0; s < n_steps; ++s) {
      const auto pos = static_cast<Eigen::Index>(future_position(model.dim, obs_len, bank.steps_[static_cast<std::size_t>(s)]));
      cross.col(s) = cov.block(obs_begin, pos, mo, 1);
    }
    part.filters = factor.solve(cross).adjoint();
    part.biases.resize(n_steps);
    for (Eigen::Index s = 0; s < n_steps; ++s) {
      const auto pos = static_cast<Eigen::Index>(future_position(model.dim, obs_len, bank.steps_[static_cast<std::size_t>(s)]));
      part.biases(s) = model.means[k](pos) - (part.filters.row(s) * part.obs_mean)(0);
    }
  });
  return bank;
}

void PredictorBank::check(const NoisyObservation& y) const {
  if (y.size() != obs_len_)
    fail(ErrorKind::InvalidArgument, "observation length " + std::to_string(y.size()) +
                                         " differs from bank Mo=" + std::to_string(obs_len_));
  const double scale = std::max({std::abs(y.noise_var), std::abs(noise_var_), std::numeric_limits<double>::min()});
  if (std::abs(y.noise_var - noise_var_) > 1e-12 * scale)
    fail(ErrorKind::InvalidArgument, "observation noise variance differs from the bank's; rebuild the bank for this SNR");
}

std::vector<double> PredictorBank::responsibilities(const NoisyObservation& y) const {
  check(y);
  const CVector obs = observation_vector(y);
  std::vector<double> logits(parts_.size());
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    const Component& p = parts_[k];
    const CVector z = p.obs_chol.triangularView<Eigen::Lower>().solve(obs - p.obs_mean);
    logits[k] = p.log_norm - z.squaredNorm();
  }
  return softmax(logits);
}

CMatrix PredictorBank::component_predictions(const NoisyObservation& y) const {
  check(y);
  const CVector obs = observation_vector(y);
  CMatrix out(static_cast<Eigen::Index>(steps_.size()), static_cast<Eigen::Index>(parts_.size()));
  for (std::size_t k = 0; k < parts_.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = parts_[k].filters * obs + parts_[k].biases;
  return out;
}

std::vector<cplx> PredictorBank::predict_steps(const NoisyObservation& y) const {
  const std::vector<double> resp = responsibilities(y);
  const CMatrix per = component_predictions(y);
  std::vector<cplx> out(steps_.size(), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < parts_.size(); ++k)
    for (std::size_t s = 0; s < steps_.size(); ++s)
      out[s] += resp[k] * per(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k));
  return out;
}

cplx predict_gmm(const PredictorBank& bank, const NoisyObservation& y) { return bank.predict_steps(y).front(); }

cplx predict_gmm_direct(const GmmModel& model, const NoisyObservation& y, std::size_t step) {
  const std::size_t pos = future_position(model.dim, y.size(), step);
  const std::vector<double> resp = responsibilities_noisy(model, y);
  const auto mo = static_cast<Eigen::Index>(y.size());
  const auto obs_begin = static_cast<Eigen::Index>(model.dim) - mo;
  const CVector obs = observation_vector(y);
  cplx out{0.0, 0.0};
  for (std::size_t k = 0; k < model.components(); ++k) {
    const CMatrix cov = model.covariance(k);
    CMatrix inner = cov.bottomRightCorner(mo, mo);
    inner.diagonal().array() += y.noise_var;
    const CVector innovation = cholesky_psd(inner).solve(obs - model.means[k].tail(mo));
    const cplx cond = (cov.block(static_cast<Eigen::Index>(pos), obs_begin, 1, mo) * innovation)(0) +
                      model.means[k](static_cast<Eigen::Index>(pos));
    out += resp[k] * cond;
  }
  return out;
}

cplx LinearPredictor::predict(const NoisyObservation& y) const {
  if (y.size() != obs_len)
    fail(ErrorKind::InvalidArgument, "LinearPredictor: observation length differs from filter length");
  return (filter * observation_vector(y))(0);
}

LinearPredictor lmmse_predictor(const CMatrix& cov, std::size_t obs_len, std::size_t step, double noise_var) {
  check_noise_var(noise_var);
  require(cov.rows() == cov.cols(), "lmmse_predictor: covariance must be square");
  const auto dim = static_cast<std::size_t>(cov.rows());
  const auto pos = static_cast<Eigen::Index>(future_position(dim, obs_len, step));
  const auto mo = static_cast<Eigen::Index>(obs_len);
  CMatrix inner = cov.bottomRightCorner(mo, mo);
  inner.diagonal().array() += noise_var;
  const CMatrix cross = cov.block(cov.rows() - mo, pos, mo, 1);

  LinearPredictor p;
  p.filter = cholesky_psd(inner).solve(cross).adjoint();
  p.obs_len = obs_len;
  p.step = step;
  p.noise_var = noise_var;
  return p;
}

double lmmse_mse(const CMatrix& cov, std::size_t obs_len, std::size_t step, double noise_var) {
  const LinearPredictor p = lmmse_predictor(cov, obs_len, step, noise_var);
  const auto pos = static_cast<Eigen::Index>(future_position(static_cast<std::size_t>(cov.rows()), obs_len, step));
  const auto mo = static_cast<Eigen::Index>(obs_len);
  const cplx explained = (p.filter * cov.block(cov.rows() - mo, pos, mo, 1))(0);
  return cov(pos, pos).real() - explained.real();
}

CMatrix sample_covariance(const Dataset& train) {
  require(!train.trajectories.empty(), "sample_covariance: empty training set");
  const CMatrix x = stack_model_order(train);
  CMatrix acc = CMatrix::Zero(x.rows(), x.rows());
  acc.selfadjointView<Eigen::Lower>().rankUpdate(x);
  CMatrix full = acc.selfadjointView<Eigen::Lower>();
  return full / static_cast<double>(x.cols());
}

BaselineCov sample_baseline(const Dataset& train) {
  BaselineCov b;
  b.kind = BaselineCov::Kind::Sample;
  b.cov = sample_covariance(train);
  b.obs_len = train.obs_len;
  return b;
}

LinearPredictor sample_cov_predictor(const Dataset& train, std::size_t step, double noise_var) {
  return baseline_predictor(sample_baseline(train), step, noise_var);
}

BaselineCov jakes_covariance(std::size_t obs_len, std::size_t pred_len, double symbol_duration_s,
                             double carrier_hz, double velocity_mps) {
  require(obs_len >= 1 && pred_len >= 1, "jakes_covariance: Mo and Np must be positive");
  require(velocity_mps >= 0.0 && std::isfinite(velocity_mps), "jakes_covariance: velocity must be nonnegative");
  const std::size_t n = obs_len + pred_len;
  const double per_lag = 2.0 * std::numbers::pi * symbol_duration_s * carrier_hz * velocity_mps / kSpeedOfLight;
  std::vector<double> row(n);
  for (std::size_t m = 0; m < n; ++m) row[m] = bessel_j0(per_lag * static_cast<double>(m));

  BaselineCov b;
  b.kind = BaselineCov::Kind::Jakes;
  b.obs_len = obs_len;
  b.velocity_mps = velocity_mps;
  b.cov.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      b.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[i > j ? i - j : j - i];
  return b;
}

LinearPredictor baseline_predictor(const BaselineCov& cov, std::size_t step, double noise_var) {
  return lmmse_predictor(cov.cov, cov.obs_len, step, noise_var);
}

LinearPredictor jakes_predictor(const BaselineCov& cov, std::size_t step, double noise_var) {
  require(cov.kind == BaselineCov::Kind::Jakes, "jakes_predictor: covariance is not a Jakes covariance");
  return baseline_predictor(cov, step, noise_var);
}

double perturb_velocity(double velocity_mps, double pct, int sign) {
  require(sign == 1 || sign == -1, "perturb_velocity: sign must be +1 or -1");
  return velocity_mps * (1.0 + static_cast<double>(sign) * pct / 100.0);
}

}  // namespace chanpred
