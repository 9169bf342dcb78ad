// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace chanpred::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "inf" || t == "+inf") return INFINITY;
  double out = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(out))
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  return out;
}

template <typename T>
T to_uint(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  T out = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError("config key '" + key + "': '" + v + "' is not a nonnegative integer");
  return out;
}

std::pair<double, double> to_range(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) throw ConfigError("config key '" + key + "' expects 'min,max'");
  return {to_double(key, parts[0]), to_double(key, parts[1])};
}

// "a:step:b" or a comma separated list
std::vector<double> to_grid(const std::string& key, const std::string& v) {
  if (v.find(':') != std::string::npos) {
    const auto parts = split(v, ':');
    if (parts.size() != 3) throw ConfigError("config key '" + key + "' expects 'start:step:stop'");
    const double a = to_double(key, parts[0]), step = to_double(key, parts[1]), b = to_double(key, parts[2]);
    if (!(step > 0.0) || b < a) throw ConfigError("config key '" + key + "': empty or invalid range");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
  return out;
}

std::vector<std::uint32_t> to_uint_list(const std::string& key, const std::string& v) {
  std::vector<std::uint32_t> out;
  for (const auto& p : split(v, ',')) out.push_back(to_uint<std::uint32_t>(key, p));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"mo", [](RunConfig& c, auto& k, auto& v) { c.mo = to_uint<std::uint32_t>(k, v); }},
      {"np", [](RunConfig& c, auto& k, auto& v) { c.np = to_uint<std::uint32_t>(k, v); }},
      {"ts_s", [](RunConfig& c, auto& k, auto& v) { c.ts_s = to_double(k, v); }},
      {"fc_hz", [](RunConfig& c, auto& k, auto& v) { c.fc_hz = to_double(k, v); }},
      {"velocity_range_mps",
       [](RunConfig& c, auto& k, auto& v) { std::tie(c.velocity_min_mps, c.velocity_max_mps) = to_range(k, v); }},
      {"velocity_range_kmh",
       [](RunConfig& c, auto& k, auto& v) {
         const auto [a, b] = to_range(k, v);
         c.velocity_min_mps = a / 3.6;
         c.velocity_max_mps = b / 3.6;
       }},
      {"n_paths", [](RunConfig& c, auto& k, auto& v) { c.n_paths = to_uint<std::uint32_t>(k, v); }},
      {"j_train", [](RunConfig& c, auto& k, auto& v) { c.j_train = to_uint<std::uint64_t>(k, v); }},
      {"t_test", [](RunConfig& c, auto& k, auto& v) { c.t_test = to_uint<std::uint64_t>(k, v); }},
      {"k", [](RunConfig& c, auto& k, auto& v) { c.k = to_uint<std::uint32_t>(k, v); }},
      {"structure", [](RunConfig& c, auto&, auto& v) { c.structure = trim(v); }},
      {"snr_grid", [](RunConfig& c, auto& k, auto& v) { c.snr_grid = to_grid(k, v); }},
      {"snr_db", [](RunConfig& c, auto& k, auto& v) { c.snr_db = to_double(k, v); }},
      {"ell", [](RunConfig& c, auto& k, auto& v) { c.ell = to_uint<std::uint32_t>(k, v); }},
      {"ell_grid", [](RunConfig& c, auto& k, auto& v) { c.ell_grid = to_uint_list(k, v); }},
      {"k_grid", [](RunConfig& c, auto& k, auto& v) { c.k_grid = to_uint_list(k, v); }},
      {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = to_uint<std::uint64_t>(k, v); }},
      {"max_iter", [](RunConfig& c, auto& k, auto& v) { c.max_iter = to_uint<std::uint32_t>(k, v); }},
      {"tol_rel", [](RunConfig& c, auto& k, auto& v) { c.tol_rel = to_double(k, v); }},
      {"min_weight", [](RunConfig& c, auto& k, auto& v) { c.min_weight = to_double(k, v); }},
      {"reg_covar", [](RunConfig& c, auto& k, auto& v) { c.reg_covar = to_double(k, v); }},
      {"bootstrap", [](RunConfig& c, auto& k, auto& v) { c.bootstrap = to_uint<std::uint32_t>(k, v); }},
      {"methods", [](RunConfig& c, auto&, auto& v) { c.methods = trim(v); }},
      {"dataset", [](RunConfig& c, auto&, auto& v) { c.dataset = trim(v); }},
      {"model", [](RunConfig& c, auto&, auto& v) { c.model = trim(v); }},
      {"report", [](RunConfig& c, auto&, auto& v) { c.report = trim(v); }},
      {"cache_dir", [](RunConfig& c, auto&, auto& v) { c.cache_dir = trim(v); }},
      {"threads", [](RunConfig& c, auto& k, auto& v) { c.threads = to_uint<std::uint32_t>(k, v); }},
  };
  return table;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

std::vector<std::uint32_t> RunConfig::effective_ell_grid() const {
  if (!ell_grid.empty()) return ell_grid;
  std::vector<std::uint32_t> g;
  for (std::uint32_t l = 1; l <= np; ++l) g.push_back(l);
  return g;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  apply_setting(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      apply_setting(cfg, key, t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  check(c.mo >= 1, "mo must be at least 1");
  check(c.np >= 1, "np must be at least 1");
  check(c.ell >= 1 && c.ell <= c.np, "ell must be in [1, np]");
  for (auto l : c.effective_ell_grid()) check(l >= 1 && l <= c.np, "ell_grid entries must be in [1, np]");
  check(c.ts_s > 0.0, "ts_s must be positive");
  check(c.fc_hz > 0.0, "fc_hz must be positive");
  check(c.velocity_min_mps >= 0.0 && c.velocity_max_mps >= c.velocity_min_mps,
        "velocity range must satisfy 0 <= min <= max");
  check(c.n_paths >= 1, "n_paths must be at least 1");
  check(c.k >= 1, "k must be at least 1");
  for (auto k : c.k_grid) check(k >= 1, "k_grid entries must be at least 1");
  check(c.structure == "full" || c.structure == "toeplitz", "structure must be 'full' or 'toeplitz'");
  check(!c.snr_grid.empty(), "snr_grid is empty");
  check(c.max_iter >= 1, "max_iter must be at least 1");
  check(c.tol_rel >= 0.0, "tol_rel must be nonnegative");
  check(c.min_weight >= 0.0 && c.min_weight < 1.0, "min_weight must be in [0, 1)");
  check(c.reg_covar >= 0.0, "reg_covar must be nonnegative");
}

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  o << "mo = " << c.mo << '\n'
    << "np = " << c.np << '\n'
    << "ts_s = " << fmt(c.ts_s) << '\n'
    << "fc_hz = " << fmt(c.fc_hz) << '\n'
    << "velocity_range_mps = " << fmt(c.velocity_min_mps) << ',' << fmt(c.velocity_max_mps) << '\n'
    << "n_paths = " << c.n_paths << '\n'
    << "j_train = " << c.j_train << '\n'
    << "t_test = " << c.t_test << '\n'
    << "k = " << c.k << '\n'
    << "structure = " << c.structure << '\n'
    << "snr_grid = " << join(c.snr_grid) << '\n'
    << "snr_db = " << fmt(c.snr_db) << '\n'
    << "ell = " << c.ell << '\n'
    << "ell_grid = " << join(c.effective_ell_grid()) << '\n'
    << "k_grid = " << join(c.k_grid) << '\n'
    << "seed = " << c.seed << '\n'
    << "max_iter = " << c.max_iter << '\n'
    << "tol_rel = " << fmt(c.tol_rel) << '\n'
    << "min_weight = " << fmt(c.min_weight) << '\n'
    << "reg_covar = " << fmt(c.reg_covar) << '\n'
    << "bootstrap = " << c.bootstrap << '\n';
  if (!c.methods.empty()) o << "methods = " << c.methods << '\n';
  o << "dataset = " << c.dataset << '\n' << "model = " << c.model << '\n' << "report = " << c.report << '\n';
  if (!c.cache_dir.empty()) o << "cache_dir = " << c.cache_dir << '\n';
  o << "threads = " << c.threads << '\n';
  return o.str();
}

}  // namespace chanpred::cli
