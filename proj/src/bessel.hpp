// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#pragma once

namespace chanpred {

/// Bessel function of the first kind, order zero. Absolute error below 1e-12
/// for |x| <= 1000.
double bessel_j0(double x);

}  // namespace chanpred
