// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include "chanmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "error.hpp"
#include "parallel.hpp"

namespace chanpred {

double Dataset::symbol_duration_s() const {
  return trajectories.empty() ? 0.0 : trajectories.front().symbol_duration_s;
}

void Dataset::validate() const {
  require(obs_len >= 1 && pred_len >= 1, "dataset: obs_len and pred_len must be positive");
  if (train_count && *train_count > trajectories.size())
    fail(ErrorKind::Data, "dataset: split index exceeds trajectory count");
  const double ts = symbol_duration_s();
  for (std::size_t j = 0; j < trajectories.size(); ++j) {
    const Trajectory& t = trajectories[j];
    if (t.coeffs.size() != dim())
      fail(ErrorKind::Data, "dataset: trajectory " + std::to_string(j) + " has length " +
                                std::to_string(t.coeffs.size()) + ", expected " +
                                std::to_string(dim()));
    if (t.symbol_duration_s != ts)
      fail(ErrorKind::Data, "dataset: inconsistent symbol duration at trajectory " +
                                std::to_string(j));
    for (const cplx& h : t.coeffs)
      if (!std::isfinite(h.real()) || !std::isfinite(h.imag()))
        fail(ErrorKind::Data, "dataset: non-finite coefficient in trajectory " +
                                  std::to_string(j));
  }
}

Trajectory generate_trajectory(double carrier_hz, double symbol_duration_s, double velocity_mps,
                               std::size_t len, std::size_t n_paths, std::uint64_t seed) {
  require(len > 0, "generate_trajectory: len must be positive");
  require(carrier_hz > 0.0 && std::isfinite(carrier_hz), "generate_trajectory: carrier must be positive");
  require(symbol_duration_s > 0.0 && std::isfinite(symbol_duration_s),
          "generate_trajectory: symbol duration must be positive");
  require(velocity_mps >= 0.0 && std::isfinite(velocity_mps),
          "generate_trajectory: velocity must be nonnegative");
  require(n_paths > 0, "generate_trajectory: n_paths must be positive");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform_angle(0.0, two_pi);

  const double fd = doppler_hz(carrier_hz, velocity_mps);
  std::vector<double> omega(n_paths), phase(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double aoa = uniform_angle(rng);
    phase[p] = uniform_angle(rng);
    omega[p] = two_pi * fd * std::cos(aoa) * symbol_duration_s;
  }

  const double gain = 1.0 / std::sqrt(static_cast<double>(n_paths));
  Trajectory out;
  out.symbol_duration_s = symbol_duration_s;
  out.velocity_mps = velocity_mps;
  out.coeffs.resize(len);
  for (std::size_t m = 0; m < len; ++m) {
    cplx acc{0.0, 0.0};
    for (std::size_t p = 0; p < n_paths; ++p)
      acc += std::polar(1.0, omega[p] * static_cast<double>(m) + phase[p]);
    out.coeffs[m] = gain * acc;
  }
  return out;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  require(spec.count > 0, "generate_dataset: count must be positive");
  require(spec.obs_len >= 1 && spec.pred_len >= 1, "generate_dataset: Mo and Np must be positive");
  require(spec.velocity_min_mps >= 0.0 && spec.velocity_max_mps >= spec.velocity_min_mps,
          "generate_dataset: invalid velocity range");

  Dataset ds;
  ds.obs_len = spec.obs_len;
  ds.pred_len = spec.pred_len;
  ds.carrier_hz = spec.carrier_hz;
  ds.trajectories.resize(spec.count);
  const std::size_t len = ds.dim();
  parallel_for(spec.count, [&](std::size_t j) {
    const std::uint64_t traj_seed = derive_seed(spec.seed, j);
    std::mt19937_64 rng(traj_seed);
    std::uniform_real_distribution<double> velocity(spec.velocity_min_mps, spec.velocity_max_mps);
    const double v = spec.velocity_min_mps == spec.velocity_max_mps ? spec.velocity_min_mps
                                                                     : velocity(rng);
    ds.trajectories[j] = generate_trajectory(spec.carrier_hz, spec.symbol_duration_s, v, len,
                                             spec.n_paths, mix_seed(traj_seed));
  });
  return ds;
}

Dataset normalize_dataset(Dataset ds) {
  require(!ds.trajectories.empty(), "normalize_dataset: empty dataset");
  double energy = 0.0;
  for (const Trajectory& t : ds.trajectories)
    for (const cplx& h : t.coeffs) energy += std::norm(h);
  const double mean_energy = energy / static_cast<double>(ds.trajectories.size());
  if (!(mean_energy > 0.0) || !std::isfinite(mean_energy))
    fail(ErrorKind::Data, "normalize_dataset: dataset has zero energy, scale undefined");

  const double scale = std::sqrt(static_cast<double>(ds.dim()) / mean_energy);
  for (Trajectory& t : ds.trajectories)
    for (cplx& h : t.coeffs) h *= scale;
  ds.normalized = true;
  return ds;
}

double noise_variance(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  require(std::isfinite(snr_db), "noise_variance: SNR must be finite or +inf");
  return std::pow(10.0, -snr_db / 10.0);
}

NoisyObservation add_awgn(const Trajectory& traj, std::size_t obs_len, double snr_db,
                          std::uint64_t seed) {
  require(obs_len >= 1, "add_awgn: Mo must be positive");
  if (obs_len > traj.coeffs.size())
    fail(ErrorKind::InvalidArgument, "add_awgn: Mo exceeds trajectory length");

  NoisyObservation y;
  y.noise_var = noise_variance(snr_db);
  y.values.resize(obs_len);
  const double sigma = std::sqrt(y.noise_var / 2.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < obs_len; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    y.values[i] = traj.coeffs[obs_len - 1 - i];
    if (sigma > 0.0) y.values[i] += cplx(sigma * re, sigma * im);
  }
  return y;
}

Trajectory phase_detrend(const Trajectory& traj) {
  const std::size_t n = traj.coeffs.size();
  require(n > 0, "phase_detrend: empty trajectory");
  for (std::size_t m = 0; m < n; ++m)
    if (traj.coeffs[m] == cplx(0.0, 0.0))
      fail(ErrorKind::Data, "phase_detrend: zero-magnitude sample at index " + std::to_string(m));
  if (n == 1) return traj;

  constexpr double pi = std::numbers::pi;
  std::vector<double> phase(n);
  phase[0] = std::arg(traj.coeffs[0]);
  for (std::size_t m = 1; m < n; ++m) {
    double step = std::arg(traj.coeffs[m]) - std::arg(traj.coeffs[m - 1]);
    step -= 2.0 * pi * std::round(step / (2.0 * pi));
    phase[m] = phase[m - 1] + step;
  }

  const double mean_m = 0.5 * static_cast<double>(n - 1);
  double mean_phase = 0.0;
  for (double p : phase) mean_phase += p;
  mean_phase /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double dm = static_cast<double>(m) - mean_m;
    sxy += dm * (phase[m] - mean_phase);
    sxx += dm * dm;
  }
  const double slope = sxy / sxx;

  Trajectory out = traj;
  for (std::size_t m = 0; m < n; ++m)
    out.coeffs[m] *= std::polar(1.0, -slope * static_cast<double>(m));
  return out;
}

CVector to_model_order(const std::vector<cplx>& chronological) {
  const auto n = static_cast<Eigen::Index>(chronological.size());
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = chronological[static_cast<std::size_t>(n - 1 - i)];
  return v;
}

CMatrix stack_model_order(const Dataset& ds) {
  const auto dim = static_cast<Eigen::Index>(ds.dim());
  CMatrix x(dim, static_cast<Eigen::Index>(ds.size()));
  for (std::size_t j = 0; j < ds.size(); ++j) {
    const auto& c = ds.trajectories[j].coeffs;
    require(c.size() == ds.dim(), "stack_model_order: trajectory length mismatch");
    for (Eigen::Index i = 0; i < dim; ++i)
      x(i, static_cast<Eigen::Index>(j)) = c[static_cast<std::size_t>(dim - 1 - i)];
  }
  return x;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds) {
  if (!ds.train_count) fail(ErrorKind::Data, "split_dataset: dataset has no recorded split index");
  const std::size_t n_train = *ds.train_count;
  if (n_train > ds.size()) fail(ErrorKind::Data, "split_dataset: split index exceeds size");
  Dataset train = ds, test = ds;
  train.trajectories.assign(ds.trajectories.begin(),
                            ds.trajectories.begin() + static_cast<std::ptrdiff_t>(n_train));
  test.trajectories.assign(ds.trajectories.begin() + static_cast<std::ptrdiff_t>(n_train),
                           ds.trajectories.end());
  train.train_count = train.size();
  test.train_count = 0;
  return {std::move(train), std::move(test)};
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

std::string format_double(double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(ErrorKind::Data, "dataset file line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    parse_error(line, std::string("cannot parse ") + what + " from '" + std::string(tok) + "'");
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string_view header_value(std::string_view tok, std::string_view key, std::size_t line) {
  if (tok.size() <= key.size() || tok.substr(0, key.size()) != key)
    parse_error(line, "expected header field " + std::string(key));
  return tok.substr(key.size());
}

}  // namespace

std::uint64_t dataset_fingerprint(const Dataset& ds) {
  std::uint64_t h = kFnvOffset;
  const std::uint64_t shape[3] = {ds.size(), ds.obs_len, ds.pred_len};
  fnv_bytes(h, shape, sizeof shape);
  for (const Trajectory& t : ds.trajectories)
    fnv_bytes(h, t.coeffs.data(), t.coeffs.size() * sizeof(cplx));
  return h;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");

  out << "CPDSET v1 J=" << ds.size() << " MO=" << ds.obs_len << " NP=" << ds.pred_len
      << " TS=" << format_double(ds.symbol_duration_s()) << '\n';
  if (ds.train_count) out << "# split=" << *ds.train_count << '\n';
  if (ds.carrier_hz) out << "# fc_hz=" << format_double(*ds.carrier_hz) << '\n';
  out << "# normalized=" << (ds.normalized ? 1 : 0) << '\n';
  const bool has_velocity =
      !ds.trajectories.empty() &&
      std::all_of(ds.trajectories.begin(), ds.trajectories.end(),
                  [](const Trajectory& t) { return t.velocity_mps.has_value(); });
  if (has_velocity) {
    out << "# velocity_mps=";
    for (std::size_t j = 0; j < ds.size(); ++j)
      out << (j ? " " : "") << format_double(*ds.trajectories[j].velocity_mps);
    out << '\n';
  }

  std::string row;
  for (const Trajectory& t : ds.trajectories) {
    row.clear();
    for (std::size_t m = 0; m < t.coeffs.size(); ++m) {
      if (m) row += ' ';
      row += format_double(t.coeffs[m].real());
      row += ' ';
      row += format_double(t.coeffs[m].imag());
    }
    row += '\n';
    out << row;
  }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (text.empty()) parse_error(1, "empty file");

  std::size_t pos = 0, line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  next_line(line);
  const auto head = split_ws(line);
  if (head.size() != 6 || head[0] != "CPDSET" || head[1] != "v1")
    parse_error(1, "malformed header, expected 'CPDSET v1 J=<int> MO=<int> NP=<int> TS=<float>'");

  Dataset ds;
  const auto count = parse_number<std::size_t>(header_value(head[2], "J=", 1), 1, "J");
  ds.obs_len = parse_number<std::size_t>(header_value(head[3], "MO=", 1), 1, "MO");
  ds.pred_len = parse_number<std::size_t>(header_value(head[4], "NP=", 1), 1, "NP");
  const double ts = parse_number<double>(header_value(head[5], "TS=", 1), 1, "TS");
  if (ds.obs_len == 0 || ds.pred_len == 0) parse_error(1, "MO and NP must be positive");
  if (!(ts > 0.0) || !std::isfinite(ts)) parse_error(1, "TS must be positive");

  std::vector<double> velocities;
  ds.trajectories.reserve(count);
  const std::size_t width = 2 * ds.dim();
  while (next_line(line)) {
    if (line.empty() || line == "\r") continue;
    if (line.front() == '#') {
      const auto body = line.substr(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = split_ws(body.substr(0, eq));
      if (key.size() != 1) continue;
      const auto vals = split_ws(body.substr(eq + 1));
      if (key[0] == "split" && vals.size() == 1) {
        ds.train_count = parse_number<std::size_t>(vals[0], line_no, "split");
      } else if (key[0] == "fc_hz" && vals.size() == 1) {
        ds.carrier_hz = parse_number<double>(vals[0], line_no, "fc_hz");
      } else if (key[0] == "normalized" && vals.size() == 1) {
        ds.normalized = parse_number<int>(vals[0], line_no, "normalized") != 0;
      } else if (key[0] == "velocity_mps") {
        velocities.clear();
        velocities.reserve(vals.size());
        for (auto v : vals) velocities.push_back(parse_number<double>(v, line_no, "velocity"));
      }
      continue;
    }
    const auto toks = split_ws(line);
    if (toks.size() != width)
      parse_error(line_no, "row has " + std::to_string(toks.size()) + " values, expected " +
                               std::to_string(width));
    Trajectory t;
    t.symbol_duration_s = ts;
    t.coeffs.resize(ds.dim());
    for (std::size_t m = 0; m < ds.dim(); ++m) {
      const double re = parse_number<double>(toks[2 * m], line_no, "coefficient");
      const double im = parse_number<double>(toks[2 * m + 1], line_no, "coefficient");
      if (!std::isfinite(re) || !std::isfinite(im)) parse_error(line_no, "non-finite coefficient");
      t.coeffs[m] = cplx(re, im);
    }
    ds.trajectories.push_back(std::move(t));
  }

  if (ds.trajectories.size() != count)
    parse_error(line_no, "header declares J=" + std::to_string(count) + " but file has " +
                             std::to_string(ds.trajectories.size()) + " rows");
  if (!velocities.empty()) {
    if (velocities.size() != count) parse_error(line_no, "velocity list length differs from J");
    for (std::size_t j = 0; j < count; ++j) ds.trajectories[j].velocity_mps = velocities[j];
  }
  if (ds.train_count && *ds.train_count > count) parse_error(line_no, "split index exceeds J");
  return ds;
}

}  // namespace chanpred
