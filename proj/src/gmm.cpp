// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include "gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "error.hpp"
#include "parallel.hpp"

namespace chanpred {

const char* structure_name(CovarianceStructure s) {
  return s == CovarianceStructure::Full ? "full" : "toeplitz";
}

CovarianceStructure parse_structure(std::string_view name) {
  if (name == "full") return CovarianceStructure::Full;
  if (name == "toeplitz") return CovarianceStructure::Toeplitz;
  fail(ErrorKind::InvalidArgument, "unknown covariance structure '" + std::string(name) + "'");
}

CMatrix GmmModel::covariance(std::size_t k) const {
  require(k < components(), "GmmModel::covariance: component index out of range");
  if (structure == CovarianceStructure::Full) return covariances[k];
  return dft_selector_for_dim(dim).covariance(spectra[k]);
}

void GmmModel::validate() const {
  const std::size_t k_count = weights.size();
  if (k_count == 0 || dim == 0) fail(ErrorKind::Data, "gmm: model needs K >= 1 and dim >= 1");
  if (means.size() != k_count) fail(ErrorKind::Data, "gmm: mean count differs from K");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorKind::Data, "gmm: invalid mixture weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::Data, "gmm: mixture weights do not sum to 1");
  for (const CVector& mu : means) {
    if (mu.size() != static_cast<Eigen::Index>(dim)) fail(ErrorKind::Data, "gmm: mean dimension mismatch");
    if (!mu.allFinite()) fail(ErrorKind::Data, "gmm: non-finite mean");
  }
  if (structure == CovarianceStructure::Full) {
    if (covariances.size() != k_count) fail(ErrorKind::Data, "gmm: covariance count differs from K");
    for (const CMatrix& c : covariances) {
      if (c.rows() != static_cast<Eigen::Index>(dim) || c.cols() != c.rows())
        fail(ErrorKind::Data, "gmm: covariance dimension mismatch");
      if (!c.allFinite() || !is_hermitian(c)) fail(ErrorKind::Data, "gmm: covariance not Hermitian");
      const double trace = c.diagonal().real().sum();
      Eigen::SelfAdjointEigenSolver<CMatrix> eig(c, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-10 * std::abs(trace) / static_cast<double>(dim))
        fail(ErrorKind::Data, "gmm: covariance is not positive semidefinite");
    }
  } else {
    if (spectra.size() != k_count) fail(ErrorKind::Data, "gmm: spectrum count differs from K");
    for (const auto& c : spectra) {
      if (c.size() != 2 * dim) fail(ErrorKind::Data, "gmm: spectrum length must be 2 dim");
      for (double v : c)
        if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::Data, "gmm: negative spectrum entry");
    }
  }
}

std::vector<double> toeplitz_project(const CMatrix& cov, const DftSelector& sel) {
  const auto n = static_cast<Eigen::Index>(sel.n);
  require(cov.rows() == n && cov.cols() == n, "toeplitz_project: dimension mismatch");
  const Eigen::Index len = 2 * n;

  // averaged first column of the Toeplitz approximation
  std::vector<cplx> col(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < n; ++d) {
    cplx s{0.0, 0.0};
    for (Eigen::Index m = d; m < n; ++m) s += 0.5 * (cov(m, m - d) + std::conj(cov(m - d, m)));
    col[static_cast<std::size_t>(d)] = s / static_cast<double>(n - d);
  }
  col[0] = col[0].real();

  // circulant generator with the middle entry left at zero
  std::vector<cplx> gen(static_cast<std::size_t>(len), cplx{0.0, 0.0});
  for (Eigen::Index d = 0; d < n; ++d) gen[static_cast<std::size_t>(d)] = col[static_cast<std::size_t>(d)];
  for (Eigen::Index d = 1; d < n; ++d)
    gen[static_cast<std::size_t>(len - d)] = std::conj(col[static_cast<std::size_t>(d)]);

  const double step = -2.0 * std::numbers::pi / static_cast<double>(len);
  std::vector<double> base(static_cast<std::size_t>(len));
  for (Eigen::Index a = 0; a < len; ++a) {
    cplx s{0.0, 0.0};
    for (Eigen::Index d = 0; d < len; ++d)
      s += gen[static_cast<std::size_t>(d)] * std::polar(1.0, step * static_cast<double>((a * d) % len));
    base[static_cast<std::size_t>(a)] = s.real() / static_cast<double>(len);
  }

  // The middle entry x is free: it shifts c_a by x (-1)^a / 2N without
  // changing the first N lags. Pick it so that c >= 0 if any such x exists.
  const double inv_len = 1.0 / static_cast<double>(len);
  auto alt = [&](Eigen::Index a) { return (a % 2 == 0 ? 1.0 : -1.0) * inv_len; };
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < len; ++a) {
    const double bound = -base[static_cast<std::size_t>(a)] / alt(a);
    if (a % 2 == 0) lo = std::max(lo, bound);
    else hi = std::min(hi, bound);
  }

  double middle = 0.0;
  if (lo <= hi) {
    middle = std::isfinite(hi) ? 0.5 * (lo + hi) : lo;
  } else {
    // minimize the clamped negative mass over the breakpoints
    auto negative_mass = [&](double x) {
      double m = 0.0;
      for (Eigen::Index a = 0; a < len; ++a)
        m += std::max(0.0, -(base[static_cast<std::size_t>(a)] + x * alt(a)));
      return m;
    };
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < len; ++a) {
      const double x = -base[static_cast<std::size_t>(a)] / alt(a);
      const double m = negative_mass(x);
      if (m < best) {
        best = m;
        middle = x;
      }
    }
  }

  std::vector<double> spectrum(static_cast<std::size_t>(len));
  for (Eigen::Index a = 0; a < len; ++a)
    spectrum[static_cast<std::size_t>(a)] = std::max(0.0, base[static_cast<std::size_t>(a)] + middle * alt(a));
  return spectrum;
}

namespace {

constexpr Eigen::Index kChunk = 2048;
constexpr double kNegligibleResp = 1e-250;

Eigen::Index chunk_count(Eigen::Index n) { return (n + kChunk - 1) / kChunk; }

struct ChunkRange {
  Eigen::Index begin, size;
};

ChunkRange chunk_range(Eigen::Index c, Eigen::Index n) {
  const Eigen::Index b = c * kChunk;
  return {b, std::min(kChunk, n - b)};
}

/// Working state shared by the E- and M-steps.
struct EmState {
  const CMatrix& x;
  std::size_t k_count;
  CovarianceStructure structure;
  const FitOptions& opts;
  std::optional<DftSelector> selector;
  CMatrix global_cov;
  double ridge = 0.0;  // lambda of the covariance prior

  std::vector<double> weights;
  std::vector<CVector> means;
  std::vector<CMatrix> covs;  // always materialized
  std::vector<std::vector<double>> spectra;

  Eigen::Index dim() const { return x.rows(); }
  Eigen::Index samples() const { return x.cols(); }

  GmmModel snapshot() const {
    GmmModel m;
    m.structure = structure;
    m.dim = static_cast<std::size_t>(dim());
    m.weights = weights;
    m.means = means;
    if (structure == CovarianceStructure::Full) m.covariances = covs;
    else m.spectra = spectra;
    return m;
  }
};

/// Sample indices ordered from least to most likely; reseeding takes from the front.
std::vector<Eigen::Index> badness_order(const Eigen::VectorXd& score) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(score.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return score(a) < score(b); });
  return idx;
}

// Samples with exactly zero responsibility contribute nothing and are
// skipped; the rest are gathered in index order into fixed-size blocks.
CMatrix weighted_scatter(const CMatrix& x, const CVector& mean, const double* resp, double total) {
  const Eigen::Index n = x.cols();
  CMatrix acc = CMatrix::Zero(x.rows(), x.rows());
  CMatrix block(x.rows(), kChunk);
  Eigen::Index fill = 0;
  auto flush = [&] {
    if (fill == 0) return;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(block.leftCols(fill));
    fill = 0;
  };
  for (Eigen::Index j = 0; j < n; ++j) {
    if (resp[j] == 0.0) continue;
    block.col(fill++) = (x.col(j) - mean) * std::sqrt(resp[j]);
    if (fill == kChunk) flush();
  }
  flush();
  CMatrix full = acc.selfadjointView<Eigen::Lower>();
  full /= total;
  full.diagonal() = full.diagonal().real().cast<cplx>();
  return full;
}

CVector weighted_sum(const CMatrix& x, const double* resp) {
  CVector sum = CVector::Zero(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (resp[j] != 0.0) sum += resp[j] * x.col(j);
  return sum;
}

// Stores cov + load * I. For Toeplitz the load is added to the projected
// spectrum (a flat spectrum of load / 2N reconstructs load * I).
void set_structured_cov(EmState& st, std::size_t k, CMatrix cov, double load) {
  if (st.structure == CovarianceStructure::Toeplitz) {
    st.spectra[k] = toeplitz_project(cov, *st.selector);
    const double flat = load / static_cast<double>(st.spectra[k].size());
    for (double& c : st.spectra[k]) c += flat;
    st.covs[k] = st.selector->covariance(st.spectra[k]);
  } else {
    cov.diagonal().array() += load;
    st.covs[k] = std::move(cov);
  }
}

/// M-step from a K x J responsibility matrix. Components whose weight falls
/// under min_weight are reseeded at the least likely samples. Returns the
/// number of reseeds.
std::size_t m_step(EmState& st, const Eigen::MatrixXd& resp, const std::vector<Eigen::Index>& order) {
  const Eigen::Index n = st.samples();
  const std::size_t k_count = st.k_count;
  std::vector<double> mass(k_count, 0.0);
  std::vector<char> dead(k_count, 0);

  parallel_for(k_count, [&](std::size_t k) {
    const auto kk = static_cast<Eigen::Index>(k);
    std::vector<double> r(static_cast<std::size_t>(n));
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      r[static_cast<std::size_t>(j)] = resp(kk, j);
      total += resp(kk, j);
    }
    mass[k] = total;
    if (!(total / static_cast<double>(n) >= st.opts.min_weight)) {
      dead[k] = 1;
      return;
    }
    st.means[k] = weighted_sum(st.x, r.data()) / total;
    set_structured_cov(st, k, weighted_scatter(st.x, st.means[k], r.data(), total), st.ridge / total);
  });

  // A dead component restarts at a poorly explained sample with the shape of
  // the live component that currently owns that sample (pooled covariance if
  // none does). A broad restart would lose every sample to the sharper
  // components and die again.
  std::size_t reseeds = 0;
  std::size_t next = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!dead[k]) continue;
    const Eigen::Index j = order[std::min(next++, order.size() - 1)];
    std::optional<std::size_t> owner;
    for (std::size_t c = 0; c < k_count; ++c)
      if (!dead[c] && (!owner || resp(static_cast<Eigen::Index>(c), j) > resp(static_cast<Eigen::Index>(*owner), j)))
        owner = c;
    st.means[k] = st.x.col(j);
    mass[k] = std::max(st.opts.min_weight * static_cast<double>(n), 1.0);
    if (owner) {
      st.covs[k] = st.covs[*owner];
      if (st.structure == CovarianceStructure::Toeplitz) st.spectra[k] = st.spectra[*owner];
    } else {
      set_structured_cov(st, k, st.global_cov, st.ridge / mass[k]);
    }
    ++reseeds;
  }

  const double total_mass = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (std::size_t k = 0; k < k_count; ++k) st.weights[k] = mass[k] / total_mass;
  return reseeds;
}

/// Factors every component covariance; reseeds components that cannot be
/// repaired. Throws when even the pooled covariance cannot be factored.
std::vector<PsdFactor> factor_components(EmState& st, const std::vector<Eigen::Index>& order,
                                         FitReport& report) {
  std::vector<std::optional<PsdFactor>> factors(st.k_count);
  parallel_for(st.k_count, [&](std::size_t k) {
    try {
      factors[k] = cholesky_psd(st.covs[k]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numeric) throw;
    }
  });

  std::vector<PsdFactor> out;
  out.reserve(st.k_count);
  std::size_t next = 0;
  for (std::size_t k = 0; k < st.k_count; ++k) {
    if (!factors[k]) {
      const Eigen::Index j = order[std::min(next++, order.size() - 1)];
      st.means[k] = st.x.col(j);
      const double mass = std::max(st.weights[k], st.opts.min_weight) * static_cast<double>(st.samples());
      set_structured_cov(st, k, st.global_cov, st.ridge / std::max(mass, 1.0));
      ++report.reseed_events;
      try {
        factors[k] = cholesky_psd(st.covs[k]);
      } catch (const Error& e) {
        fail(ErrorKind::Numeric, std::string("fit_em: component collapse unrecoverable after reseeding: ") + e.what());
      }
    }
    if (factors[k]->jitter > 0.0) ++report.jitter_events;
    out.push_back(std::move(*factors[k]));
  }
  return out;
}

/// sum_k tr(C_k^{-1}) from the factors, the log-prior term of the objective.
double inverse_trace_sum(const std::vector<PsdFactor>& factors) {
  double s = 0.0;
  for (const PsdFactor& f : factors) {
    const CMatrix inv_l = f.lower.triangularView<Eigen::Lower>().solve(CMatrix::Identity(f.lower.rows(), f.lower.cols()));
    s += inv_l.squaredNorm();
  }
  return s;
}

/// Fills resp with responsibilities and returns per-sample log-likelihoods.
/// All whitening maps L_k^{-1} are stacked so each block of samples is
/// whitened for every component by one matrix product.
Eigen::VectorXd e_step(const EmState& st, const std::vector<PsdFactor>& factors, Eigen::MatrixXd& resp) {
  const Eigen::Index n = st.samples();
  const Eigen::Index d = st.dim();
  const auto k_count = static_cast<Eigen::Index>(st.k_count);
  const double log_pi_d = static_cast<double>(d) * std::log(std::numbers::pi);
  resp.resize(k_count, n);
  Eigen::VectorXd ll(n);

  std::vector<double> log_norm(st.k_count);
  CMatrix whiten(k_count * d, d);
  CVector offset(k_count * d);
  for (std::size_t k = 0; k < st.k_count; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    log_norm[k] = (st.weights[k] > 0.0 ? std::log(st.weights[k]) : -std::numeric_limits<double>::infinity()) -
                  log_pi_d - factors[k].log_det();
    const CMatrix inv = factors[k].lower.triangularView<Eigen::Lower>().solve(CMatrix::Identity(d, d));
    whiten.middleRows(kk * d, d) = inv;
    offset.segment(kk * d, d) = inv * st.means[k];
  }

  constexpr Eigen::Index kBlock = 256;
  const std::size_t blocks = static_cast<std::size_t>((n + kBlock - 1) / kBlock);
  parallel_for(blocks, [&](std::size_t c) {
    const Eigen::Index b = static_cast<Eigen::Index>(c) * kBlock;
    const Eigen::Index s = std::min(kBlock, n - b);
    CMatrix z = whiten * st.x.middleCols(b, s);
    z.colwise() -= offset;
    for (Eigen::Index k = 0; k < k_count; ++k)
      resp.row(k).segment(b, s) =
          (log_norm[static_cast<std::size_t>(k)] - z.middleRows(k * d, d).colwise().squaredNorm().array()).matrix();
    for (Eigen::Index j = b; j < b + s; ++j) {
      const double peak = resp.col(j).maxCoeff();
      const double lse = peak + std::log((resp.col(j).array() - peak).exp().sum());
      ll(j) = lse;
      // Values this small are below one ulp of any live component's sums;
      // zeroing them avoids subnormal arithmetic in the M-step.
      resp.col(j) = (resp.col(j).array() - lse).exp().matrix();
      resp.col(j) = (resp.col(j).array() < kNegligibleResp).select(0.0, resp.col(j));
    }
  });
  return ll;
}

/// k-means++ seeding followed by Lloyd iterations; returns hard labels and
/// each sample's squared distance to its center.
std::vector<Eigen::Index> kmeans_labels(const CMatrix& x, std::size_t k_count, const FitOptions& opts,
                                        Eigen::VectorXd& dist_out) {
  const Eigen::Index n = x.cols();
  const auto kk = static_cast<Eigen::Index>(k_count);
  std::mt19937_64 rng(opts.seed);
  CMatrix centers(x.rows(), kk);

  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.col(0) = x.col(pick(rng));
  Eigen::VectorXd dist = (x.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index k = 1; k < kk; ++k) {
    const double total = dist.sum();
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double run = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        run += dist(j);
        if (run >= target && dist(j) > 0.0) {
          chosen = j;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.col(k) = x.col(chosen);
    parallel_for(static_cast<std::size_t>(chunk_count(n)), [&](std::size_t c) {
      const auto [b, s] = chunk_range(static_cast<Eigen::Index>(c), n);
      const Eigen::VectorXd d =
          (x.middleCols(b, s).colwise() - centers.col(k)).colwise().squaredNorm().transpose();
      dist.segment(b, s) = dist.segment(b, s).cwiseMin(d);
    });
  }

  std::vector<Eigen::Index> labels(static_cast<std::size_t>(n), 0);
  const Eigen::VectorXd x_norm = x.colwise().squaredNorm().transpose();
  for (std::size_t it = 0; it <= opts.kmeans_iter; ++it) {
    const Eigen::VectorXd c_norm = centers.colwise().squaredNorm().transpose();
    parallel_for(static_cast<std::size_t>(chunk_count(n)), [&](std::size_t c) {
      const auto [b, s] = chunk_range(static_cast<Eigen::Index>(c), n);
      const Eigen::MatrixXd cross = (centers.adjoint() * x.middleCols(b, s)).real();
      for (Eigen::Index j = 0; j < s; ++j) {
        Eigen::Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < kk; ++k) {
          const double d = c_norm(k) - 2.0 * cross(k, j);
          if (d < best_d) {
            best_d = d;
            best = k;
          }
        }
        labels[static_cast<std::size_t>(b + j)] = best;
        dist(b + j) = std::max(0.0, best_d + x_norm(b + j));
      }
    });
    if (it == opts.kmeans_iter) break;

    CMatrix sums = CMatrix::Zero(x.rows(), kk);
    std::vector<std::size_t> counts(k_count, 0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto l = labels[static_cast<std::size_t>(j)];
      sums.col(l) += x.col(j);
      ++counts[static_cast<std::size_t>(l)];
    }
    for (Eigen::Index k = 0; k < kk; ++k)
      if (counts[static_cast<std::size_t>(k)] > 0)
        centers.col(k) = sums.col(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  dist_out = dist;
  return labels;
}

}  // namespace

FitResult fit_em(const CMatrix& samples, std::size_t components, CovarianceStructure structure,
                 const FitOptions& opts, const FitObserver& observer) {
  const Eigen::Index n = samples.cols();
  require(samples.rows() >= 1, "fit_em: samples must have positive dimension");
  require(n >= 1, "fit_em: empty dataset");
  require(components >= 1, "fit_em: K must be positive");
  if (components > static_cast<std::size_t>(n))
    fail(ErrorKind::InvalidArgument, "fit_em: K=" + std::to_string(components) +
                                         " exceeds the number of samples J=" + std::to_string(n));
  require(opts.tol_rel >= 0.0 && opts.min_weight >= 0.0 && opts.reg_covar >= 0.0, "fit_em: invalid options");
  if (!samples.allFinite()) fail(ErrorKind::Data, "fit_em: non-finite sample");

  EmState st{samples, components, structure, opts, std::nullopt, {}, 0.0, {}, {}, {}, {}};
  if (structure == CovarianceStructure::Toeplitz)
    st.selector = dft_selector_for_dim(static_cast<std::size_t>(samples.rows()));
  st.weights.assign(components, 0.0);
  st.means.assign(components, CVector::Zero(samples.rows()));
  st.covs.assign(components, CMatrix::Zero(samples.rows(), samples.rows()));
  if (structure == CovarianceStructure::Toeplitz) st.spectra.assign(components, {});

  {
    const CVector mean = samples.rowwise().mean();
    const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    CMatrix pooled = weighted_scatter(samples, mean, ones.data(), static_cast<double>(n));
    const double scale = pooled.diagonal().real().sum() / static_cast<double>(samples.rows());
    st.ridge = opts.reg_covar * scale * static_cast<double>(n) / static_cast<double>(components);
    if (structure == CovarianceStructure::Toeplitz)
      pooled = st.selector->covariance(toeplitz_project(pooled, *st.selector));
    st.global_cov = std::move(pooled);
  }

  FitReport report;
  Eigen::VectorXd dist;
  const auto labels = kmeans_labels(samples, components, opts, dist);
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(components), n);
  for (Eigen::Index j = 0; j < n; ++j) resp(labels[static_cast<std::size_t>(j)], j) = 1.0;
  // far-from-center samples first
  std::vector<Eigen::Index> order = badness_order(-dist);
  report.reseed_events += m_step(st, resp, order);

  bool reseeded_last = false;
  for (std::size_t t = 0;; ++t) {
    const std::size_t reseeds_before = report.reseed_events;
    const auto factors = factor_components(st, order, report);
    if (report.reseed_events != reseeds_before) reseeded_last = true;
    const Eigen::VectorXd ll = e_step(st, factors, resp);
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) total += ll(j);
    if (st.ridge > 0.0) total -= st.ridge * inverse_trace_sum(factors);
    if (!std::isfinite(total)) fail(ErrorKind::Numeric, "fit_em: non-finite log-likelihood");
    report.log_likelihood_trace.push_back(total);

    if (t > 0) {
      const double prev = report.log_likelihood_trace[t - 1];
      const double delta = total - prev;
      if (!reseeded_last && delta < -1e-9 * std::abs(prev)) ++report.monotonicity_violations;
      if (!reseeded_last && delta < opts.tol_rel * std::abs(prev)) {
        report.converged = true;
        break;
      }
    }
    if (t == opts.max_iter) break;

    order = badness_order(ll);
    const std::size_t reseeds = m_step(st, resp, order);
    report.reseed_events += reseeds;
    reseeded_last = reseeds > 0;
    ++report.iterations;
    if (observer) observer(report.iterations, st.snapshot());
  }

  return {st.snapshot(), std::move(report)};
}

FitResult fit_em(const Dataset& ds, std::size_t components, CovarianceStructure structure,
                 const FitOptions& opts, const FitObserver& observer) {
  require(!ds.trajectories.empty(), "fit_em: empty dataset");
  require(ds.normalized, "fit_em: dataset must be normalized before fitting");
  ds.validate();
  return fit_em(stack_model_order(ds), components, structure, opts, observer);
}

std::vector<double> responsibilities_clean(const GmmModel& model, const CVector& h) {
  if (h.size() != static_cast<Eigen::Index>(model.dim))
    fail(ErrorKind::InvalidArgument, "responsibilities_clean: vector length differs from model dimension");
  std::vector<double> logits(model.components());
  for (std::size_t k = 0; k < model.components(); ++k) {
    const double lw = model.weights[k] > 0.0 ? std::log(model.weights[k]) : -std::numeric_limits<double>::infinity();
    logits[k] = lw + log_pdf_complex_gaussian(h, model.means[k], model.covariance(k));
  }
  return softmax(logits);
}

std::vector<double> responsibilities_noisy(const GmmModel& model, const NoisyObservation& y) {
  const auto mo = static_cast<Eigen::Index>(y.size());
  if (mo < 1 || mo > static_cast<Eigen::Index>(model.dim))
    fail(ErrorKind::InvalidArgument, "responsibilities_noisy: observation length must be in [1, dim]");
  if (!(y.noise_var >= 0.0) || !std::isfinite(y.noise_var))
    fail(ErrorKind::InvalidArgument, "responsibilities_noisy: noise variance must be nonnegative");

  const CVector obs = Eigen::Map<const CVector>(y.values.data(), mo);
  std::vector<double> logits(model.components());
  for (std::size_t k = 0; k < model.components(); ++k) {
    CMatrix inner = model.covariance(k).bottomRightCorner(mo, mo);
    inner.diagonal().array() += y.noise_var;
    const double lw = model.weights[k] > 0.0 ? std::log(model.weights[k]) : -std::numeric_limits<double>::infinity();
    logits[k] = lw + log_pdf_complex_gaussian(obs, model.means[k].tail(mo), cholesky_psd(inner));
  }
  return softmax(logits);
}

}  // namespace chanpred
