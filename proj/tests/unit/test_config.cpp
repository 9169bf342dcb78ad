// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "run_config.hpp"
#include "test_util.hpp"

using namespace chanpred::cli;

TEST_SUITE("config") {
  TEST_CASE("defaults validate and survive a text round trip") {
    const RunConfig d;
    validate(d);
    const RunConfig back = parse_config(to_text(d));
    CHECK(to_text(back) == to_text(d));
    CHECK(d.effective_ell_grid() == std::vector<std::uint32_t>{1});
  }

  TEST_CASE("parsing") {
    const RunConfig c = parse_config(
        "# comment\n"
        "\n"
        "mo = 16\n"
        "np=4\n"
        "  k =  64  \n"
        "snr_grid = -10:10:30\n"
        "k_grid = 2,8\n"
        "velocity_range_kmh = 36,72\n"
        "structure = toeplitz\n");
    CHECK(c.mo == 16);
    CHECK(c.np == 4);
    CHECK(c.k == 64);
    CHECK(c.snr_grid == std::vector<double>{-10, 0, 10, 20, 30});
    CHECK(c.k_grid == std::vector<std::uint32_t>{2, 8});
    CHECK(c.velocity_min_mps == doctest::Approx(10.0));
    CHECK(c.velocity_max_mps == doctest::Approx(20.0));
    CHECK(c.structure == "toeplitz");
    CHECK(c.effective_ell_grid() == std::vector<std::uint32_t>{1, 2, 3, 4});
    validate(c);
  }

  TEST_CASE("errors name the line and key") {
    auto message = [](const std::string& text) {
      try {
        parse_config(text);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("mo = 3\nmo = 4\n").find("line 2: duplicate key 'mo'") != std::string::npos);
    CHECK(message("bogus = 1\n").find("unknown config key 'bogus'") != std::string::npos);
    CHECK(message("mo\n").find("line 1") != std::string::npos);
    CHECK(message("k = -3\n").find("'k'") != std::string::npos);
    CHECK(message("ts_s = fast\n").find("not a number") != std::string::npos);
    CHECK(message("snr_grid = 0:0:10\n").find("invalid range") != std::string::npos);
    CHECK(message("velocity_range_mps = 1\n").find("min,max") != std::string::npos);
  }

  TEST_CASE("validation") {
    RunConfig c;
    c.ell = 2;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = RunConfig{};
    c.structure = "diagonal";
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = RunConfig{};
    c.velocity_min_mps = 5;
    c.velocity_max_mps = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = RunConfig{};
    c.np = 2;
    c.ell_grid = {1, 3};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = RunConfig{};
    c.reg_covar = -1;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }

  TEST_CASE("overrides and files") {
    RunConfig c;
    apply_override(c, "seed=42");
    apply_override(c, "snr_grid=inf");
    CHECK(c.seed == 42);
    CHECK(std::isinf(c.snr_grid.at(0)));
    CHECK_THROWS_AS(apply_override(c, "seed"), ConfigError);

    TempDir dir;
    std::ofstream(dir / "run.cfg") << "t_test = 77\n";
    CHECK(load_config(dir / "run.cfg").t_test == 77);
    CHECK_THROWS_AS(load_config(dir / "absent.cfg"), ConfigError);
  }
}
