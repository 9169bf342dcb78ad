// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// GMM-based channel predictor (responsibility-weighted bank of per-component
// LMMSE filters) and the classical LMMSE baselines.

#pragma once

#include <optional>
#include <vector>

#include "chanmodel.hpp"
#include "gmm.hpp"

namespace chanpred {

/// Position of h[Mo-1+step] inside a model-order vector of length dim whose
/// trailing obs_len entries are the observation window.
std::size_t future_position(std::size_t dim, std::size_t obs_len, std::size_t step);

/// Unit vector e_step of length Mo+Np (one at position Np - step).
std::vector<double> index_selector(std::size_t obs_len, std::size_t pred_len, std::size_t step);

/// Filters and biases precomputed for one noise level and a set of steps.
class PredictorBank {
 public:
  static PredictorBank build(const GmmModel& model, std::size_t obs_len, std::vector<std::size_t> steps,
                             double noise_var);

  std::size_t components() const { return parts_.size(); }
  std::size_t obs_len() const { return obs_len_; }
  std::size_t pred_len() const { return dim_ - obs_len_; }
  const std::vector<std::size_t>& steps() const { return steps_; }
  double noise_var() const { return noise_var_; }

  /// Rows are w_k for each configured step (steps x Mo).
  const CMatrix& filters(std::size_t k) const { return parts_.at(k).filters; }
  const CVector& biases(std::size_t k) const { return parts_.at(k).biases; }

  std::vector<double> responsibilities(const NoisyObservation& y) const;
  /// Per-component conditional means, steps x K.
  CMatrix component_predictions(const NoisyObservation& y) const;
  /// Mixture conditional mean for every configured step.
  std::vector<cplx> predict_steps(const NoisyObservation& y) const;

 private:
  struct Component {
    double log_norm = 0.0;  // log pi_k - Mo log(pi) - log det
    CVector obs_mean;
    CMatrix obs_chol;
    CMatrix filters;
    CVector biases;
  };

  void check(const NoisyObservation& y) const;

  std::size_t dim_ = 0;
  std::size_t obs_len_ = 0;
  std::vector<std::size_t> steps_;
  double noise_var_ = 0.0;
  std::vector<Component> parts_;
};

/// Mixture prediction for the bank's first step.
cplx predict_gmm(const PredictorBank& bank, const NoisyObservation& y);

/// Same estimate without precomputation: solves the per-component LMMSE
/// system for this observation.
cplx predict_gmm_direct(const GmmModel& model, const NoisyObservation& y, std::size_t step);

struct LinearPredictor {
  Eigen::RowVectorXcd filter;  // length Mo
  std::size_t obs_len = 0;
  std::size_t step = 0;
  double noise_var = 0.0;

  cplx predict(const NoisyObservation& y) const;
};

/// Zero-mean LMMSE filter e^T C S (S^T C S + sigma^2 I)^{-1}.
LinearPredictor lmmse_predictor(const CMatrix& cov, std::size_t obs_len, std::size_t step, double noise_var);

/// MSE of lmmse_predictor on zero-mean data with covariance cov.
double lmmse_mse(const CMatrix& cov, std::size_t obs_len, std::size_t step, double noise_var);

/// (1/J) sum h_j h_j^H in model order, without mean removal.
CMatrix sample_covariance(const Dataset& train);

struct BaselineCov {
  enum class Kind { Sample, Jakes };
  Kind kind = Kind::Sample;
  CMatrix cov;
  std::size_t obs_len = 0;
  std::optional<double> velocity_mps;
};

BaselineCov sample_baseline(const Dataset& train);
LinearPredictor sample_cov_predictor(const Dataset& train, std::size_t step, double noise_var);

/// Real symmetric Toeplitz matrix with entries J0(2 pi |i-j| ts fc v / c).
BaselineCov jakes_covariance(std::size_t obs_len, std::size_t pred_len, double symbol_duration_s,
                             double carrier_hz, double velocity_mps);

LinearPredictor jakes_predictor(const BaselineCov& cov, std::size_t step, double noise_var);
LinearPredictor baseline_predictor(const BaselineCov& cov, std::size_t step, double noise_var);

/// v (1 + sign * pct / 100), sign in {+1, -1}.
double perturb_velocity(double velocity_mps, double pct, int sign);

}  // namespace chanpred
