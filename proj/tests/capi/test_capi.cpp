// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// Exercises the shared library through its public header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chanpred/chanpred.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

namespace {

cp_dataset* make_dataset(uint64_t count, uint64_t train, uint32_t np = 1, uint64_t seed = 1) {
  cp_generate_params p;
  cp_generate_params_default(&p);
  p.count = count;
  p.obs_len = 5;
  p.pred_len = np;
  p.seed = seed;
  p.train_count = train;
  cp_dataset* ds = nullptr;
  REQUIRE(cp_dataset_generate(&p, &ds) == CP_OK);
  return ds;
}

cp_fit_params quick_fit(uint32_t k) {
  cp_fit_params f;
  cp_fit_params_default(&f);
  f.components = k;
  f.max_iter = 20;
  return f;
}

}  // namespace

TEST_CASE("defaults and version") {
  CHECK(std::string(cp_version()).size() > 0);
  cp_fit_params f;
  cp_fit_params_default(&f);
  CHECK(f.components == 128);
  CHECK(f.max_iter == 500);
  CHECK(f.tol_rel == 1e-6);
  CHECK(f.min_weight == 1e-6);
  CHECK(f.reg_covar == 1e-6);
  cp_generate_params g;
  cp_generate_params_default(&g);
  CHECK(g.obs_len == 19);
  CHECK(g.n_paths == 64);
  CHECK(g.normalize == 1);
  CHECK(cp_noise_variance(10.0) == doctest::Approx(0.1));
  cp_generate_params_default(nullptr);
  cp_fit_params_default(nullptr);
  cp_sweep_params_default(nullptr);
}

TEST_CASE("null handles and arguments are rejected") {
  cp_dataset* ds = nullptr;
  CHECK(cp_dataset_generate(nullptr, &ds) == CP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(cp_last_error()).find("params is NULL") != std::string::npos);
  CHECK(cp_dataset_load(nullptr, &ds) == CP_ERR_INVALID_ARGUMENT);
  cp_dataset_info info;
  CHECK(cp_dataset_info_get(nullptr, &info) == CP_ERR_INVALID_ARGUMENT);
  cp_model* m = nullptr;
  CHECK(cp_model_fit(nullptr, nullptr, &m, nullptr, nullptr, 0, nullptr) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_bank_predict(nullptr, nullptr, 0, 0.0, nullptr, 0, nullptr, 0) == CP_ERR_INVALID_ARGUMENT);
  // freeing NULL is a no-op
  cp_dataset_free(nullptr);
  cp_model_free(nullptr);
  cp_bank_free(nullptr);
  // success clears the message
  cp_dataset* ok = make_dataset(4, 2);
  CHECK(std::string(cp_last_error()).empty());
  cp_dataset_free(ok);
}

TEST_CASE("dataset lifecycle") {
  TempDir dir;
  cp_dataset* ds = make_dataset(30, 20);
  cp_dataset_info info;
  REQUIRE(cp_dataset_info_get(ds, &info) == CP_OK);
  CHECK(info.count == 30);
  CHECK(info.obs_len == 5);
  CHECK(info.normalized == 1);
  CHECK(info.has_split == 1);
  CHECK(info.train_count == 20);
  CHECK(info.has_carrier == 1);

  const std::string path = (dir / "d.cpd").string();
  REQUIRE(cp_dataset_save(ds, path.c_str()) == CP_OK);
  cp_dataset* back = nullptr;
  REQUIRE(cp_dataset_load(path.c_str(), &back) == CP_OK);
  cp_dataset_info info2;
  cp_dataset_info_get(back, &info2);
  CHECK(info2.fingerprint == info.fingerprint);

  std::vector<double> a(12), b(12);
  REQUIRE(cp_dataset_trajectory(ds, 7, a.data(), a.size()) == CP_OK);
  REQUIRE(cp_dataset_trajectory(back, 7, b.data(), b.size()) == CP_OK);
  CHECK(a == b);
  CHECK(cp_dataset_trajectory(ds, 30, a.data(), a.size()) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_dataset_trajectory(ds, 0, a.data(), 11) == CP_ERR_INVALID_ARGUMENT);

  cp_dataset *train = nullptr, *test = nullptr;
  REQUIRE(cp_dataset_split(ds, &train, &test) == CP_OK);
  cp_dataset_info_get(train, &info2);
  CHECK(info2.count == 20);
  cp_dataset_info_get(test, &info2);
  CHECK(info2.count == 10);

  cp_dataset* missing = nullptr;
  CHECK(cp_dataset_load((dir / "none.cpd").string().c_str(), &missing) == CP_ERR_IO);
  CHECK(missing == nullptr);
  std::FILE* f = std::fopen((dir / "bad.cpd").string().c_str(), "w");
  std::fputs("CPDSET v1 J=3\n", f);
  std::fclose(f);
  CHECK(cp_dataset_load((dir / "bad.cpd").string().c_str(), &missing) == CP_ERR_DATA);
  CHECK(std::string(cp_last_error()).find("line 1") != std::string::npos);

  cp_generate_params p;
  cp_generate_params_default(&p);
  p.count = 3;
  p.train_count = 4;
  CHECK(cp_dataset_generate(&p, &missing) == CP_ERR_INVALID_ARGUMENT);

  for (cp_dataset* d : {ds, back, train, test}) cp_dataset_free(d);
}

TEST_CASE("fit, save, load, predict") {
  TempDir dir;
  cp_dataset* ds = make_dataset(600, 500, 2);
  cp_dataset *train = nullptr, *test = nullptr;
  REQUIRE(cp_dataset_split(ds, &train, &test) == CP_OK);

  cp_fit_params fp = quick_fit(3);
  cp_model* model = nullptr;
  cp_fit_summary summary;
  std::vector<double> trace(64);
  size_t trace_len = 0;
  REQUIRE(cp_model_fit(train, &fp, &model, &summary, trace.data(), trace.size(), &trace_len) == CP_OK);
  CHECK(trace_len == summary.iterations + 1);
  CHECK(trace[trace_len - 1] == summary.final_log_likelihood);
  CHECK(summary.monotonicity_violations == 0);

  cp_model_info mi;
  REQUIRE(cp_model_info_get(model, &mi) == CP_OK);
  CHECK(mi.components == 3);
  CHECK(mi.dim == 7);
  CHECK(mi.structure == CP_STRUCTURE_FULL);

  const std::string path = (dir / "m.cpgmm").string();
  REQUIRE(cp_model_save(model, path.c_str()) == CP_OK);
  cp_model* loaded = nullptr;
  REQUIRE(cp_model_load(path.c_str(), &loaded) == CP_OK);

  const double s2 = cp_noise_variance(15.0);
  const uint32_t steps[2] = {1, 2};
  cp_bank *bank = nullptr, *bank2 = nullptr;
  REQUIRE(cp_bank_build(model, 5, steps, 2, s2, &bank) == CP_OK);
  REQUIRE(cp_bank_build(loaded, 5, steps, 2, s2, &bank2) == CP_OK);

  std::vector<double> y(10);
  for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = std::sin(0.7 * i);
  double out[4], out2[4], resp[3], resp2[3];
  REQUIRE(cp_bank_predict(bank, y.data(), 5, s2, out, 4, resp, 3) == CP_OK);
  REQUIRE(cp_bank_predict(bank2, y.data(), 5, s2, out2, 4, nullptr, 0) == CP_OK);
  CHECK(std::memcmp(out, out2, sizeof out) == 0);
  REQUIRE(cp_model_responsibilities(model, y.data(), 5, s2, resp2, 3) == CP_OK);
  for (int k = 0; k < 3; ++k) CHECK(resp[k] == doctest::Approx(resp2[k]).epsilon(1e-12));
  CHECK(resp[0] + resp[1] + resp[2] == doctest::Approx(1.0));

  CHECK(cp_bank_predict(bank, y.data(), 4, s2, out, 4, nullptr, 0) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_bank_predict(bank, y.data(), 5, s2 * 2, out, 4, nullptr, 0) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_bank_predict(bank, y.data(), 5, s2, out, 3, nullptr, 0) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_bank_predict(bank, y.data(), 5, s2, out, 4, resp, 2) == CP_ERR_INVALID_ARGUMENT);
  const uint32_t bad_step = 3;
  cp_bank* none = nullptr;
  CHECK(cp_bank_build(model, 5, &bad_step, 1, s2, &none) == CP_ERR_INVALID_ARGUMENT);
  CHECK(cp_bank_build(model, 5, steps, 0, s2, &none) == CP_ERR_INVALID_ARGUMENT);
  CHECK(none == nullptr);

  cp_fit_params bad = quick_fit(1000);
  cp_model* m2 = nullptr;
  CHECK(cp_model_fit(train, &bad, &m2, nullptr, nullptr, 0, nullptr) == CP_ERR_INVALID_ARGUMENT);
  bad = quick_fit(2);
  bad.structure = static_cast<cp_structure>(7);
  CHECK(cp_model_fit(train, &bad, &m2, nullptr, nullptr, 0, nullptr) == CP_ERR_INVALID_ARGUMENT);

  std::FILE* f = std::fopen(path.c_str(), "r+b");
  std::fseek(f, 30, SEEK_SET);
  std::fputc(0x5a, f);
  std::fclose(f);
  CHECK(cp_model_load(path.c_str(), &m2) == CP_ERR_DATA);

  cp_bank_free(bank);
  cp_bank_free(bank2);
  cp_model_free(model);
  cp_model_free(loaded);
  cp_dataset_free(ds);
  cp_dataset_free(train);
  cp_dataset_free(test);
}

TEST_CASE("unnormalized data is refused by the fit") {
  cp_generate_params p;
  cp_generate_params_default(&p);
  p.count = 50;
  p.obs_len = 3;
  p.normalize = 0;
  cp_dataset* ds = nullptr;
  REQUIRE(cp_dataset_generate(&p, &ds) == CP_OK);
  cp_fit_params fp = quick_fit(2);
  cp_model* m = nullptr;
  CHECK(cp_model_fit(ds, &fp, &m, nullptr, nullptr, 0, nullptr) == CP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(cp_last_error()).find("normalized") != std::string::npos);
  cp_dataset_free(ds);
}

TEST_CASE("sweeps") {
  TempDir dir;
  cp_dataset* ds = make_dataset(500, 400, 2);
  cp_dataset *train = nullptr, *test = nullptr;
  REQUIRE(cp_dataset_split(ds, &train, &test) == CP_OK);

  cp_sweep_params sp;
  cp_sweep_params_default(&sp);
  CHECK(sp.bootstrap_resamples == 200);
  sp.components = 2;
  sp.fit = quick_fit(2);
  sp.methods = "gmm, lmmse-sample,jakes-perfect";
  const double snr[3] = {0.0, 10.0, 20.0};
  sp.snr_grid = snr;
  sp.snr_grid_len = 3;
  sp.cache_dir = nullptr;
  cp_sweep_summary sum;
  const std::string csv = (dir / "snr.csv").string();
  REQUIRE(cp_sweep_run(train, test, &sp, csv.c_str(), &sum) == CP_OK);
  CHECK(sum.fit_invocations == 1);
  CHECK(sum.rows == 3);
  CHECK(sum.columns == 3);

  sp.axis = CP_AXIS_COMPONENTS;
  const uint32_t ks[2] = {1, 2};
  sp.k_grid = ks;
  sp.k_grid_len = 2;
  const std::string cache = (dir / "cache").string();
  sp.cache_dir = cache.c_str();
  REQUIRE(cp_sweep_run(train, test, &sp, csv.c_str(), &sum) == CP_OK);
  CHECK(sum.fit_invocations == 2);
  REQUIRE(cp_sweep_run(train, test, &sp, csv.c_str(), &sum) == CP_OK);
  CHECK(sum.fit_invocations == 0);
  CHECK(sum.cache_hits == 2);

  sp.axis = CP_AXIS_STEP;
  const uint32_t st[2] = {1, 2};
  sp.step_grid = st;
  sp.step_grid_len = 2;
  REQUIRE(cp_sweep_run(train, test, &sp, csv.c_str(), &sum) == CP_OK);
  CHECK(sum.rows == 2);

  sp.step_grid_len = 0;
  CHECK(cp_sweep_run(train, test, &sp, csv.c_str(), &sum) == CP_ERR_INVALID_ARGUMENT);
  sp.axis = static_cast<cp_axis>(9);
  CHECK(cp_sweep_run(train, test, &sp, csv.c_str(), &sum) == CP_ERR_INVALID_ARGUMENT);
  sp.axis = CP_AXIS_SNR;
  sp.methods = "gmm,telepathy";
  CHECK(cp_sweep_run(train, test, &sp, csv.c_str(), &sum) == CP_ERR_INVALID_ARGUMENT);
  sp.methods = " , ";
  CHECK(cp_sweep_run(train, test, &sp, csv.c_str(), &sum) == CP_ERR_INVALID_ARGUMENT);
  sp.methods = "lmmse-sample";
  CHECK(cp_sweep_run(train, test, &sp, (dir / "no/such/x.csv").string().c_str(), &sum) == CP_ERR_IO);

  cp_dataset_free(ds);
  cp_dataset_free(train);
  cp_dataset_free(test);
}
