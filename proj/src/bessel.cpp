// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include "bessel.hpp"

#include <cmath>

namespace chanpred {

namespace {

// sum_k (-x^2/4)^k / (k!)^2; the largest term stays below ~1e2 for |x| <= 8.
double j0_series(double x) {
  const double q = -0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

// Miller's backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalized by
// J_0 + 2 sum_{k>=1} J_{2k} = 1.
double j0_miller(double x) {
  const int start = 2 * (static_cast<int>(x + 12.0 * std::cbrt(x) + 40.0) / 2);
  double next = 0.0, cur = 1e-300;
  double norm = 0.0, j0 = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = (2.0 * k / x) * cur - next;
    next = cur;
    cur = prev;  // cur now holds J_{k-1}
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
    }
  }
  j0 = cur;
  norm += j0;
  return j0 / norm;
}

}  // namespace

double bessel_j0(double x) {
  x = std::abs(x);
  if (x <= 8.0) return j0_series(x);
  return j0_miller(x);
}

}  // namespace chanpred
