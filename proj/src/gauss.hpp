// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// Circularly-symmetric complex Gaussian kernels.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "chanmodel.hpp"

namespace chanpred {

bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12);

/// Trace-relative diagonal loading tried in order until Cholesky succeeds.
inline constexpr std::array<double, 4> kJitterLadder{0.0, 1e-12, 1e-10, 1e-8};

struct PsdFactor {
  CMatrix lower;        // L with L L^H = C + jitter * I
  double jitter = 0.0;  // absolute diagonal loading that was applied

  Eigen::Index dim() const { return lower.rows(); }
  double log_det() const;
  /// Solves L z = x and returns |z|^2, i.e. x^H (C + jitter I)^{-1} x.
  double mahalanobis(const CVector& x) const;
  /// Solves (C + jitter I) X = B.
  CMatrix solve(const CMatrix& rhs) const;
};

/// Cholesky factor of a Hermitian PSD matrix with jitter escalation; throws
/// Numeric (with the smallest eigenvalue) when the ladder is exhausted.
PsdFactor cholesky_psd(const CMatrix& cov, std::span<const double> ladder = kJitterLadder);

/// log N_C(x; mean, cov) = -d log(pi) - log det C - (x-mean)^H C^{-1} (x-mean).
double log_pdf_complex_gaussian(const CVector& x, const CVector& mean, const CMatrix& cov);

/// Same density with a precomputed factor.
double log_pdf_complex_gaussian(const CVector& x, const CVector& mean, const PsdFactor& factor);

double log_sum_exp(std::span<const double> v);

/// Normalized probabilities from unnormalized log weights.
std::vector<double> softmax(std::span<const double> logits);

/// First N = Mo+Np columns of the 2N-point DFT matrix, stored transposed as an
/// N x 2N matrix: q(n, a) = exp(-2 pi i a n / 2N). Unnormalized, so
/// q q^H = 2N I. The Toeplitz covariance for a spectrum c (length 2N, c >= 0)
/// is conj(q) diag(c) q^T, i.e. C(m, n) = sum_a c_a exp(2 pi i a (m - n) / 2N).
struct DftSelector {
  std::size_t n = 0;
  CMatrix q;

  std::size_t spectrum_len() const { return 2 * n; }
  CMatrix covariance(std::span<const double> spectrum) const;
};

DftSelector build_dft_selector(std::size_t obs_len, std::size_t pred_len);
DftSelector dft_selector_for_dim(std::size_t n);

}  // namespace chanpred
