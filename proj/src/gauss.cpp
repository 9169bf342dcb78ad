// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include "gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "error.hpp"

namespace chanpred {

bool is_hermitian(const CMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double PsdFactor::log_det() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) s += std::log(lower(i, i).real());
  return 2.0 * s;
}

double PsdFactor::mahalanobis(const CVector& x) const {
  const CVector z = lower.triangularView<Eigen::Lower>().solve(x);
  return z.squaredNorm();
}

CMatrix PsdFactor::solve(const CMatrix& rhs) const {
  CMatrix z = lower.triangularView<Eigen::Lower>().solve(rhs);
  lower.adjoint().triangularView<Eigen::Upper>().solveInPlace(z);
  return z;
}

PsdFactor cholesky_psd(const CMatrix& cov, std::span<const double> ladder) {
  if (cov.rows() != cov.cols() || cov.rows() == 0)
    fail(ErrorKind::InvalidArgument, "cholesky_psd: matrix must be square and nonempty");
  if (!cov.allFinite()) fail(ErrorKind::Numeric, "cholesky_psd: non-finite covariance entry");
  if (!is_hermitian(cov)) fail(ErrorKind::InvalidArgument, "cholesky_psd: matrix is not Hermitian");

  const auto n = cov.rows();
  const double trace = cov.diagonal().real().sum();
  const double scale = trace > 0.0 ? trace / static_cast<double>(n) : 1.0;

  for (double rel : ladder) {
    CMatrix loaded = cov;
    const double eps = rel * scale;
    loaded.diagonal().array() += eps;
    Eigen::LLT<CMatrix, Eigen::Lower> llt(loaded);
    if (llt.info() != Eigen::Success) continue;
    CMatrix l = llt.matrixL();
    bool ok = true;
    for (Eigen::Index i = 0; i < n && ok; ++i)
      ok = std::isfinite(l(i, i).real()) && l(i, i).real() > 0.0;
    if (ok) return PsdFactor{std::move(l), eps};
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov, Eigen::EigenvaluesOnly);
  std::ostringstream msg;
  msg << "cholesky_psd: matrix not positive definite after jitter "
      << ladder.back() * scale << " (smallest eigenvalue " << eig.eigenvalues().minCoeff()
      << ", trace/dim " << scale << ")";
  fail(ErrorKind::Numeric, msg.str());
}

double log_pdf_complex_gaussian(const CVector& x, const CVector& mean, const PsdFactor& factor) {
  if (x.size() != mean.size() || x.size() != factor.dim())
    fail(ErrorKind::InvalidArgument, "log_pdf_complex_gaussian: dimension mismatch");
  const double d = static_cast<double>(x.size());
  return -d * std::log(std::numbers::pi) - factor.log_det() - factor.mahalanobis(x - mean);
}

double log_pdf_complex_gaussian(const CVector& x, const CVector& mean, const CMatrix& cov) {
  if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size())
    fail(ErrorKind::InvalidArgument, "log_pdf_complex_gaussian: dimension mismatch");
  return log_pdf_complex_gaussian(x, mean, cholesky_psd(cov));
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(peak)) return peak;
  double s = 0.0;
  for (double x : v) s += std::exp(x - peak);
  return peak + std::log(s);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double norm = log_sum_exp(logits);
  if (!std::isfinite(norm)) fail(ErrorKind::Numeric, "softmax: all log weights are -inf or non-finite");
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) p[i] = std::exp(logits[i] - norm);
  return p;
}

CMatrix DftSelector::covariance(std::span<const double> spectrum) const {
  require(spectrum.size() == spectrum_len(), "DftSelector::covariance: spectrum length must be 2N");
  Eigen::VectorXd c(static_cast<Eigen::Index>(spectrum.size()));
  for (std::size_t a = 0; a < spectrum.size(); ++a) c(static_cast<Eigen::Index>(a)) = spectrum[a];
  CMatrix cov = q.conjugate() * c.asDiagonal() * q.transpose();
  // exact Hermitian symmetry and a real diagonal
  cov = (0.5 * (cov + cov.adjoint())).eval();
  cov.diagonal() = cov.diagonal().real().cast<cplx>();
  return cov;
}

DftSelector build_dft_selector(std::size_t obs_len, std::size_t pred_len) {
  require(obs_len + pred_len >= 1, "build_dft_selector: Mo + Np must be positive");
  return dft_selector_for_dim(obs_len + pred_len);
}

DftSelector dft_selector_for_dim(std::size_t n) {
  require(n >= 1, "dft_selector_for_dim: dimension must be positive");
  DftSelector sel;
  sel.n = n;
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(2 * n);
  sel.q.resize(rows, cols);
  const double base = -2.0 * std::numbers::pi / static_cast<double>(2 * n);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index a = 0; a < cols; ++a) {
      // reduce the exponent modulo 2N before the trig call
      const auto k = static_cast<double>((r * a) % cols);
      sel.q(r, a) = std::polar(1.0, base * k);
    }
  return sel;
}

}  // namespace chanpred
