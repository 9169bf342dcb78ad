// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors
// End-to-end runs of the chanpred binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "chanmodel.hpp"
#include "doctest.h"
#include "gmm.hpp"
#include "predict.hpp"
#include "test_util.hpp"

#ifndef CHANPRED_CLI
#error "CHANPRED_CLI must name the binary under test"
#endif

using namespace chanpred;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CHANPRED_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kSmall =
    "--set j_train=1500 --set t_test=300 --set mo=4 --set np=2 --set k=3 --set max_iter=40 --set bootstrap=20";

std::string generate(const TempDir& dir, const std::string& name, const std::string& extra = "") {
  const std::string path = (dir / name).string();
  const Run r = run("generate " + kSmall + " " + extra + " --out " + path);
  REQUIRE_MESSAGE(r.code == 0, r.out);
  return path;
}

std::string fit(const TempDir& dir, const std::string& data, const std::string& name,
                const std::string& extra = "") {
  const std::string path = (dir / name).string();
  const Run r = run("fit " + kSmall + " " + extra + " --dataset " + data + " --out " + path);
  REQUIRE_MESSAGE(r.code == 0, r.out);
  return path;
}

// Largest elementwise difference between two models with the same shape.
double model_distance(const GmmModel& a, const GmmModel& b) {
  REQUIRE(a.components() == b.components());
  double d = 0.0;
  for (std::size_t k = 0; k < a.components(); ++k) {
    d = std::max(d, std::abs(a.weights[k] - b.weights[k]));
    d = std::max(d, (a.means[k] - b.means[k]).cwiseAbs().maxCoeff());
    d = std::max(d, (a.covariances[k] - b.covariances[k]).cwiseAbs().maxCoeff());
  }
  return d;
}

}  // namespace

TEST_CASE("generate is deterministic across runs and thread counts") {
  TempDir dir;
  const std::string a = generate(dir, "a.txt", "--threads 1");
  const std::string b = generate(dir, "b.txt", "--threads 1");
  const std::string c = generate(dir, "c.txt", "--threads 4");
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));
  const Dataset ds = load_dataset(a);
  CHECK(ds.size() == 1800);
  CHECK(ds.train_count == std::optional<std::size_t>{1500});
}

TEST_CASE("fit is reproducible") {
  TempDir dir;
  const std::string data = generate(dir, "d.txt");
  const std::string m1 = fit(dir, data, "m1.bin", "--threads 1");
  const std::string m2 = fit(dir, data, "m2.bin", "--threads 1");
  const std::string m4 = fit(dir, data, "m4.bin", "--threads 4");
  CHECK(slurp(m1) == slurp(m2));
  // the first log line names the output path
  const auto trace = [](const std::string& m) {
    const std::string s = slurp(m + ".log");
    return s.substr(s.find('\n'));
  };
  CHECK(trace(m1) == trace(m2));
  CHECK(model_distance(load_model(m1), load_model(m4)) <= 1e-12);
  const std::string log = slurp(m1 + ".log");
  CHECK(log.find("fit: K=3 structure=full") == 0);
  CHECK(log.find("ll[0] = ") != std::string::npos);
}

TEST_CASE("toeplitz models are smaller on disk") {
  TempDir dir;
  const std::string data = generate(dir, "d.txt");
  const std::string full = fit(dir, data, "full.bin");
  const std::string toep = fit(dir, data, "toep.bin", "--set structure=toeplitz");
  CHECK(std::filesystem::file_size(toep) < std::filesystem::file_size(full));
  CHECK(load_model(toep).structure == CovarianceStructure::Toeplitz);
}

TEST_CASE("predict matches the library") {
  TempDir dir;
  const std::string data = generate(dir, "d.txt");
  const std::string model = fit(dir, data, "m.bin");
  const std::filesystem::path obs = dir / "obs.txt";
  {
    std::ofstream o(obs);
    o << "CPOBS v1 MO=4\n0.5 -0.25\n0.4 0.1\n-0.3 0.6\n0.2 0.2\n";
  }
  const Run r = run("predict --model " + model + " --obs " + obs.string() + " --set np=2 --ell 2 --snr-db 15");
  REQUIRE_MESSAGE(r.code == 0, r.out);

  const GmmModel g = load_model(model);
  const PredictorBank bank = PredictorBank::build(g, 4, {2}, noise_variance(15.0));
  NoisyObservation y;
  y.values = {cplx(0.5, -0.25), cplx(0.4, 0.1), cplx(-0.3, 0.6), cplx(0.2, 0.2)};
  y.noise_var = noise_variance(15.0);
  const cplx p = predict_gmm(bank, y);
  char expect[128];
  std::snprintf(expect, sizeof expect, "prediction %.17g %.17g\n", p.real(), p.imag());
  CHECK(r.out.find(expect) == 0);
  CHECK(r.out.find("responsibility ") != std::string::npos);
}

TEST_CASE("single component has full responsibility") {
  TempDir dir;
  const std::string data = generate(dir, "d.txt");
  const std::string model = fit(dir, data, "m.bin", "--set k=1");
  const std::filesystem::path obs = dir / "obs.txt";
  {
    std::ofstream o(obs);
    o << "CPOBS v1 MO=4\n1 0 1 0 1 0 1 0\n";
  }
  const Run r = run("predict --model " + model + " --obs " + obs.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("responsibility 0 1\n") != std::string::npos);
}

TEST_CASE("sweep writes a report and reuses cached fits") {
  TempDir dir;
  const std::string data = generate(dir, "d.txt");
  const std::string report = (dir / "snr.csv").string();
  const std::string cache = (dir / "cache").string();
  const std::string args = "sweep --axis snr " + kSmall + " --set snr_grid=0,10,20 --set methods=gmm,lmmse-sample" +
                           " --dataset " + data + " --out " + report + " --cache-dir " + cache;
  const Run cold = run(args);
  REQUIRE_MESSAGE(cold.code == 0, cold.out);
  CHECK(cold.out.find("rows=3 methods=2 fits=1 cache_hits=0") != std::string::npos);
  const std::string csv = slurp(report);
  CHECK(csv.find("axis,gmm,gmm_se,lmmse-sample,lmmse-sample_se\n") != std::string::npos);
  const Run warm = run(args);
  REQUIRE(warm.code == 0);
  CHECK(warm.out.find("fits=0 cache_hits=1") != std::string::npos);
  CHECK(slurp(report) == csv);
}

TEST_CASE("exit codes") {
  TempDir dir;
  const std::string data = generate(dir, "d.txt");
  CHECK(run("sweep --axis bogus --dataset " + data).code == 2);
  CHECK(run("fit --set nonsense=1 --dataset " + data).code == 2);
  CHECK(run("").code == 2);
  CHECK(run("fit --dataset " + (dir / "missing.txt").string() + " --out " + (dir / "m.bin").string()).code == 3);

  Dataset unsplit = load_dataset(data);
  unsplit.train_count.reset();
  save_dataset(unsplit, dir / "unsplit.txt");
  const Run r = run("fit " + kSmall + " --dataset " + (dir / "unsplit.txt").string() + " --out " +
                    (dir / "m.bin").string());
  CHECK(r.code == 3);
  CHECK(r.out.find("no recorded train/test split") != std::string::npos);

  const std::string model = fit(dir, data, "ok.bin");
  const std::filesystem::path bad = dir / "bad.txt";
  {
    std::ofstream o(bad);
    o << "CPOBS v1 MO=4\n1 0 1\n";
  }
  CHECK(run("predict --model " + model + " --obs " + bad.string()).code == 3);
  const std::filesystem::path good = dir / "good.txt";
  {
    std::ofstream o(good);
    o << "CPOBS v1 MO=4\n1 0 1 0 1 0 1 0\n";
  }
  CHECK(run("predict --model " + model + " --obs " + good.string() + " --ell 3").code == 2);
  CHECK(run("predict --model " + (dir / "none.bin").string() + " --obs " + good.string()).code == 3);
}

TEST_CASE("large dataset file loads") {
  TempDir dir;
  const std::string path = (dir / "big.txt").string();
  const Run gen = run("generate --set j_train=150000 --set t_test=0 --set mo=19 --set np=1 --out " + path);
  REQUIRE_MESSAGE(gen.code == 0, gen.out);
  CHECK(gen.out.find("J=150000") != std::string::npos);
  const Dataset ds = load_dataset(path);
  CHECK(ds.size() == 150000);
  CHECK(ds.trajectories.back().coeffs.size() == 20);
}
