// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "gauss.hpp"
#include "oracles.hpp"

using namespace chanpred;

TEST_SUITE("gauss") {
  TEST_CASE("log pdf agrees with the explicit inverse and determinant") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + trial % 6;
      const CMatrix cov = oracle::random_psd(n, rng);
      const CVector mean = oracle::random_vector(n, rng);
      const CVector x = oracle::random_vector(n, rng, 2.0);
      const double ref = oracle::log_pdf(x, mean, cov);
      CHECK(log_pdf_complex_gaussian(x, mean, cov) == doctest::Approx(ref).epsilon(1e-11));
    }
  }

  TEST_CASE("scalar density") {
    // N_C(x; 0, s) = exp(-|x|^2 / s) / (pi s)
    CMatrix c(1, 1);
    c(0, 0) = 2.5;
    CVector x(1), m(1);
    x(0) = {1.0, -2.0};
    m(0) = 0.0;
    CHECK(log_pdf_complex_gaussian(x, m, c) == doctest::Approx(-std::log(std::numbers::pi * 2.5) - 5.0 / 2.5));
  }

  TEST_CASE("jitter ladder repairs a singular PSD matrix") {
    CVector v(3);
    v << cplx(1, 1), cplx(0, 2), cplx(-1, 0);
    const CMatrix rank1 = v * v.adjoint();
    const PsdFactor f = cholesky_psd(rank1);
    CHECK(f.jitter > 0.0);
    const double scale = rank1.diagonal().real().sum() / 3.0;
    CHECK(f.jitter <= 1e-8 * scale * (1 + 1e-12));
    CHECK((f.lower * f.lower.adjoint() - rank1).norm() < 1e-7 * rank1.norm());
  }

  TEST_CASE("exact PD matrix needs no jitter") {
    std::mt19937_64 rng(3);
    const PsdFactor f = cholesky_psd(oracle::random_psd(5, rng));
    CHECK(f.jitter == 0.0);
  }

  TEST_CASE("indefinite matrix fails with the smallest eigenvalue") {
    CMatrix a = CMatrix::Identity(2, 2);
    a(1, 1) = -1.0;
    try {
      cholesky_psd(a);
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Numeric);
      CHECK(std::string(e.what()).find("smallest eigenvalue -1") != std::string::npos);
    }
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(cholesky_psd(CMatrix(0, 0)), Error);
    CHECK_THROWS_AS(cholesky_psd(CMatrix::Zero(2, 3)), Error);
    CMatrix nh = CMatrix::Identity(2, 2);
    nh(0, 1) = 0.5;
    CHECK_THROWS_AS(cholesky_psd(nh), Error);
    CMatrix nan = CMatrix::Identity(2, 2);
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(cholesky_psd(nan), Error);
    CHECK_THROWS_AS(log_pdf_complex_gaussian(CVector::Zero(2), CVector::Zero(3), CMatrix::Identity(2, 2)), Error);
  }

  TEST_CASE("solve and mahalanobis") {
    std::mt19937_64 rng(5);
    const CMatrix c = oracle::random_psd(4, rng);
    const CVector x = oracle::random_vector(4, rng);
    const PsdFactor f = cholesky_psd(c);
    CHECK((f.solve(x) - c.inverse() * x).norm() < 1e-10 * x.norm());
    CHECK(f.mahalanobis(x) == doctest::Approx((x.adjoint() * c.inverse() * x)(0).real()).epsilon(1e-11));
    CHECK(f.log_det() == doctest::Approx(std::log(c.determinant().real())).epsilon(1e-11));
  }

  TEST_CASE("log_sum_exp and softmax") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(log_sum_exp(std::vector<double>{}) == -inf);
    CHECK(log_sum_exp(std::vector<double>{-inf, -inf}) == -inf);
    CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
    const auto p = softmax(std::vector<double>{-1e6, 0.0, -inf});
    CHECK(p[1] == 1.0);
    CHECK(p[2] == 0.0);
    CHECK_THROWS_AS(softmax(std::vector<double>{-inf}), Error);
  }

  TEST_CASE("DFT selector is orthogonal up to 2N and yields Toeplitz matrices") {
    for (std::size_t n : {1u, 2u, 5u, 20u}) {
      const DftSelector sel = dft_selector_for_dim(n);
      const auto m = static_cast<Eigen::Index>(n);
      CHECK((sel.q * sel.q.adjoint() - 2.0 * static_cast<double>(n) * CMatrix::Identity(m, m)).norm() < 1e-10 * n);
      std::mt19937_64 rng(n);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> c(2 * n);
      for (double& v : c) v = u(rng);
      const CMatrix cov = sel.covariance(c);
      CHECK(is_hermitian(cov, 0.0));
      for (Eigen::Index i = 1; i < m; ++i)
        for (Eigen::Index j = 1; j < m; ++j) CHECK(std::abs(cov(i, j) - cov(i - 1, j - 1)) < 1e-12);
      CHECK(Eigen::SelfAdjointEigenSolver<CMatrix>(cov).eigenvalues().minCoeff() > -1e-12);
    }
    CHECK_THROWS_AS(dft_selector_for_dim(0), Error);
    CHECK_THROWS_AS(dft_selector_for_dim(3).covariance(std::vector<double>(5, 1.0)), Error);
  }

  TEST_CASE("worked scalar and small-matrix values") {
    CMatrix one(1, 1);
    one(0, 0) = 1.0;
    CVector mu(1);
    mu(0) = cplx(0.4, -0.2);
    CHECK(log_pdf_complex_gaussian(mu, mu, one) == doctest::Approx(-1.144729885849400).epsilon(1e-12));
    CMatrix two(1, 1);
    two(0, 0) = 2.0;
    CVector x = mu;
    x(0) += 1.0;
    CHECK(log_pdf_complex_gaussian(x, mu, two) ==
          doctest::Approx(-std::log(2.0 * std::numbers::pi) - 0.5).epsilon(1e-12));

    const PsdFactor id = cholesky_psd(CMatrix::Identity(3, 3));
    CHECK(id.jitter == 0.0);
    CHECK(id.lower == CMatrix::Identity(3, 3));

    const CMatrix ones = CMatrix::Ones(2, 2);
    const PsdFactor f = cholesky_psd(ones);
    CHECK(f.jitter > 0.0);
    CHECK((f.lower * f.lower.adjoint() - ones).cwiseAbs().maxCoeff() <= 1e-7 * 2.0);
  }

  TEST_CASE("flat and DC spectra") {
    for (std::size_t n : {1u, 3u, 8u}) {
      const DftSelector sel = dft_selector_for_dim(n);
      const auto m = static_cast<Eigen::Index>(n);
      const CMatrix flat = sel.covariance(std::vector<double>(2 * n, 1.0));
      CHECK((flat - 2.0 * static_cast<double>(n) * CMatrix::Identity(m, m)).norm() < 1e-10);
      std::vector<double> dc(2 * n, 0.0);
      dc[0] = 1.0;
      CHECK((sel.covariance(dc) - CMatrix::Ones(m, m)).norm() < 1e-12);
    }
  }
}
