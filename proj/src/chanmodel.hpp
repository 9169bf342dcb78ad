// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// Channel trajectories: synthetic Clarke/Jakes fading generation, AWGN
// observations, dataset normalization, phase detrending and the text dataset
// format.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace chanpred {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kDefaultPaths = 64;

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }
inline double doppler_hz(double carrier_hz, double velocity_mps) {
  return carrier_hz * velocity_mps / kSpeedOfLight;
}

struct Trajectory {
  std::vector<cplx> coeffs;  // chronological h[0] .. h[len-1]
  double symbol_duration_s = 0.0;
  std::optional<double> velocity_mps;
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  std::size_t obs_len = 0;   // Mo
  std::size_t pred_len = 0;  // Np
  bool normalized = false;
  std::optional<std::size_t> train_count;  // trajectories [0, train_count) are training data
  std::optional<double> carrier_hz;

  std::size_t size() const { return trajectories.size(); }
  std::size_t dim() const { return obs_len + pred_len; }
  double symbol_duration_s() const;
  /// Throws unless every trajectory has length dim(), a common symbol
  /// duration and finite entries.
  void validate() const;
};

/// Observed window y = h_Mo + n, stored newest first: values[0] = h[Mo-1] + n.
struct NoisyObservation {
  std::vector<cplx> values;
  double noise_var = 0.0;

  std::size_t size() const { return values.size(); }
};

/// Sum-of-sinusoids Clarke model with n_paths unit-gain scatterers.
Trajectory generate_trajectory(double carrier_hz, double symbol_duration_s, double velocity_mps,
                               std::size_t len, std::size_t n_paths, std::uint64_t seed);

struct DatasetSpec {
  std::size_t count = 0;
  std::size_t obs_len = 19;
  std::size_t pred_len = 1;
  double symbol_duration_s = 0.5e-3;
  double carrier_hz = 3.5e9;
  double velocity_min_mps = kmh_to_mps(3.0);
  double velocity_max_mps = kmh_to_mps(100.0);
  std::size_t n_paths = kDefaultPaths;
  std::uint64_t seed = 0;
};

/// Trajectory j uses its own seed derived from (seed, j); velocities are drawn
/// uniformly from [velocity_min_mps, velocity_max_mps]. Not normalized.
Dataset generate_dataset(const DatasetSpec& spec);

/// Scales every trajectory by one common factor so the average energy equals
/// obs_len + pred_len.
Dataset normalize_dataset(Dataset ds);

/// noise variance for an SNR given in dB (SNR = 1 / sigma^2); +inf gives 0.
double noise_variance(double snr_db);

/// Takes h[0..Mo-1], flips it to newest-first order and adds circularly
/// symmetric complex Gaussian noise. Standard-normal draws depend only on the
/// seed, so one seed gives the same noise realization scaled per SNR.
NoisyObservation add_awgn(const Trajectory& traj, std::size_t obs_len, double snr_db,
                          std::uint64_t seed);

/// Removes the least-squares linear trend of the unwrapped phase.
Trajectory phase_detrend(const Trajectory& traj);

/// Reverse-chronological column vector [h[N-1], ..., h[0]] used by the mixture model.
CVector to_model_order(const std::vector<cplx>& chronological);
/// Stacks all trajectories as columns (dim x J) in model order.
CMatrix stack_model_order(const Dataset& ds);

/// Training and test parts according to train_count.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds);

/// 64-bit FNV-1a over shape and coefficient bits.
std::uint64_t dataset_fingerprint(const Dataset& ds);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace chanpred
