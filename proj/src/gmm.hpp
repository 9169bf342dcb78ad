// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// Complex Gaussian mixture over trajectory vectors in model order
// [h[N-1], ..., h[0]], fitted by EM with full or Toeplitz covariances.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "chanmodel.hpp"
#include "gauss.hpp"

namespace chanpred {

enum class CovarianceStructure : std::uint8_t { Full = 0, Toeplitz = 1 };

const char* structure_name(CovarianceStructure s);
CovarianceStructure parse_structure(std::string_view name);

struct GmmModel {
  CovarianceStructure structure = CovarianceStructure::Full;
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<CVector> means;
  std::vector<CMatrix> covariances;          // full: K matrices dim x dim
  std::vector<std::vector<double>> spectra;  // toeplitz: K vectors of length 2 dim

  std::size_t components() const { return weights.size(); }
  /// Covariance of component k, reconstructed from its spectrum for Toeplitz models.
  CMatrix covariance(std::size_t k) const;
  /// Throws Data on any invariant violation.
  void validate() const;
};

struct FitOptions {
  std::size_t max_iter = 500;
  double tol_rel = 1e-6;
  std::uint64_t seed = 0;
  double min_weight = 1e-6;
  std::size_t kmeans_iter = 10;
  // Ridge prior on the covariances: the M-step returns S_k + (lambda / N_k) I
  // with lambda = reg_covar * (trace/dim of the pooled covariance) * J / K,
  // i.e. a floor of reg_covar * trace/dim for a component of average size.
  // 0 gives plain maximum likelihood.
  double reg_covar = 0.0;
};

struct FitReport {
  std::size_t iterations = 0;  // completed M-steps
  // Objective after initialization and after every M-step: the data
  // log-likelihood, minus lambda * sum_k tr(C_k^{-1}) when reg_covar > 0.
  std::vector<double> log_likelihood_trace;
  bool converged = false;
  std::size_t jitter_events = 0;
  std::size_t reseed_events = 0;
  // Steps where the log-likelihood dropped by more than 1e-9 relative. Expected
  // to stay zero for full covariances; the Toeplitz projection step is not an
  // exact maximizer, so it may be nonzero there.
  std::size_t monotonicity_violations = 0;
};

struct FitResult {
  GmmModel model;
  FitReport report;
};

/// Called after every M-step with the updated parameters.
using FitObserver = std::function<void(std::size_t iteration, const GmmModel&)>;

/// EM on raw samples (columns of a dim x J matrix in model order).
FitResult fit_em(const CMatrix& samples, std::size_t components, CovarianceStructure structure,
                 const FitOptions& opts = {}, const FitObserver& observer = {});

/// EM on a normalized dataset.
FitResult fit_em(const Dataset& ds, std::size_t components, CovarianceStructure structure,
                 const FitOptions& opts = {}, const FitObserver& observer = {});

/// Posterior component probabilities for a clean trajectory vector (model order).
std::vector<double> responsibilities_clean(const GmmModel& model, const CVector& h);

/// Posterior component probabilities for a noisy observation of the trailing
/// Mo = y.size() coordinates: N_C(y; S^T mu_k, S^T C_k S + sigma^2 I).
/// sigma^2 = 0 is accepted as the noiseless limit.
std::vector<double> responsibilities_noisy(const GmmModel& model, const NoisyObservation& y);

/// Nonnegative spectrum c whose Toeplitz reconstruction matches the
/// diagonal averages of cov: the averaged first column is embedded into a
/// 2N circulant generator whose free middle entry is chosen to keep the
/// spectrum nonnegative when possible; remaining negatives are clamped to 0.
std::vector<double> toeplitz_project(const CMatrix& cov, const DftSelector& sel);

void save_model(const GmmModel& model, const std::filesystem::path& path);
GmmModel load_model(const std::filesystem::path& path);

std::vector<unsigned char> serialize_model(const GmmModel& model);
GmmModel deserialize_model(const std::vector<unsigned char>& bytes);

}  // namespace chanpred
