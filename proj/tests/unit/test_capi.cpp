/* Copyright 2026 The scomp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "doctest.h"
#include "scomp/scomp.h"

namespace {

const char* kClean = R"({
  "family": {"family": "gaussian1d"},
  "n": 300, "epsilon": 0.2, "delta": 0.1, "trials": 2, "seed": 5,
  "learner": {"compression_size": 16}
})";

std::string take(char* s) {
  std::string out = s ? s : "";
  scomp_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status mapping and error messages") {
  scomp_config* cfg = nullptr;
  CHECK(scomp_config_parse("{\"n\": 3}", &cfg) == SCOMP_CONFIG_ERROR);
  CHECK(cfg == nullptr);
  CHECK(std::strlen(scomp_last_error()) > 0);
  CHECK(scomp_config_parse("{not json", &cfg) == SCOMP_CONFIG_ERROR);
  CHECK(scomp_config_load("/nonexistent.json", &cfg) == SCOMP_CONFIG_ERROR);
  CHECK(scomp_config_parse(nullptr, &cfg) == SCOMP_INVALID_ARGUMENT);
  CHECK(scomp_config_preset("nope", &cfg) == SCOMP_CONFIG_ERROR);
  CHECK(std::string(scomp_status_name(SCOMP_IO_ERROR)) == "I/O error");

  char* out = nullptr;
  CHECK(scomp_waterfill(R"({"envelope": {"kind": "constant_on_box", "c": 1, "volume": 1},
                            "epsilon": 3})",
                        &out) == SCOMP_INFEASIBLE);
  CHECK(out == nullptr);

  REQUIRE(scomp_config_parse(kClean, &cfg) == SCOMP_OK);
  CHECK(std::string(scomp_last_error()).empty());
  CHECK(scomp_config_set_trials(cfg, 0) == SCOMP_CONFIG_ERROR);
  CHECK(scomp_config_set_output(cfg, nullptr, "xml") == SCOMP_CONFIG_ERROR);
  CHECK(scomp_config_set_cap(cfg, 5000000) == SCOMP_CONFIG_ERROR);
  // Rejected edits leave the config untouched.
  char* path = nullptr;
  char* format = nullptr;
  REQUIRE(scomp_config_get_output(cfg, &path, &format) == SCOMP_OK);
  CHECK(path == nullptr);
  CHECK(take(format) == "csv");
  scomp_config_free(cfg);
}

TEST_CASE("simulate, render and write") {
  scomp_config* cfg = nullptr;
  REQUIRE(scomp_config_parse(kClean, &cfg) == SCOMP_OK);
  scomp_report* a = nullptr;
  scomp_report* b = nullptr;
  REQUIRE(scomp_simulate(cfg, &a) == SCOMP_OK);
  REQUIRE(scomp_simulate(cfg, &b) == SCOMP_OK);

  char* text = nullptr;
  REQUIRE(scomp_report_render(a, "csv", &text) == SCOMP_OK);
  auto csv_a = take(text);
  REQUIRE(scomp_report_render(b, "csv", &text) == SCOMP_OK);
  CHECK(take(text) == csv_a);
  CHECK(csv_a.rfind("trial,seed,tv_error,l2_error,candidate_count,truncated,clique_found,wall_ms",
                    0) == 0);
  REQUIRE(scomp_report_render(a, "json", &text) == SCOMP_OK);
  CHECK(take(text).find("\"rows\"") != std::string::npos);
  CHECK(scomp_report_render(a, "yaml", &text) == SCOMP_CONFIG_ERROR);

  scomp_summary s{};
  REQUIRE(scomp_report_summary(a, &s) == SCOMP_OK);
  CHECK(s.trials == 2);
  CHECK(s.tv_median >= 0.0);
  CHECK(s.tv_median <= 1.0);
  CHECK(s.clique_failures == 0);

  CHECK(scomp_report_write(a, "csv", "/nonexistent/dir/out.csv") == SCOMP_IO_ERROR);

  REQUIRE(scomp_config_set_seed(cfg, 6) == SCOMP_OK);
  scomp_report* c = nullptr;
  REQUIRE(scomp_simulate(cfg, &c) == SCOMP_OK);
  REQUIRE(scomp_report_render(c, "csv", &text) == SCOMP_OK);
  CHECK(take(text) != csv_a);

  scomp_report_free(a);
  scomp_report_free(b);
  scomp_report_free(c);
  scomp_config_free(cfg);
}

TEST_CASE("sweep through the C interface") {
  scomp_config* cfg = nullptr;
  REQUIRE(scomp_config_parse(kClean, &cfg) == SCOMP_OK);
  REQUIRE(scomp_config_set_trials(cfg, 1) == SCOMP_OK);
  const double values[] = {100, 200};
  scomp_report* out[2] = {nullptr, nullptr};
  REQUIRE(scomp_sweep(cfg, "n", values, 2, out) == SCOMP_OK);
  for (auto* r : out) {
    CHECK(r != nullptr);
    scomp_report_free(r);
  }
  CHECK(scomp_sweep(cfg, "n", values, 0, out) == SCOMP_CONFIG_ERROR);
  CHECK(scomp_sweep(cfg, "s", values, 2, out) == SCOMP_CONFIG_ERROR);
  CHECK(scomp_sweep(cfg, "k", values, 2, out) == SCOMP_CONFIG_ERROR);
  scomp_config_free(cfg);
}

TEST_CASE("certify, waterfill and presets") {
  char* out = nullptr;
  REQUIRE(scomp_certify(R"({"family": {"family": "gaussian_iso", "sigma0": 1, "dim": 1},
                            "alpha": 3})",
                        &out) == SCOMP_OK);
  CHECK(take(out).find("\"xi\"") != std::string::npos);
  CHECK(scomp_certify(R"({"family": {"family": "gaussian_iso"}, "alpha": 1})", &out) ==
        SCOMP_INVALID_ARGUMENT);

  REQUIRE(scomp_waterfill(R"({"envelope": {"kind": "constant_on_box", "c": 1, "volume": 1},
                              "epsilon": 0.5})",
                          &out) == SCOMP_OK);
  CHECK(take(out).find("\"l1_bound\": 0.5") != std::string::npos);

  REQUIRE(scomp_preset_list(&out) == SCOMP_OK);
  CHECK(take(out).find("gaussian1d_adversarial") != std::string::npos);

  scomp_config* cfg = nullptr;
  REQUIRE(scomp_config_preset("gaussian1d_adversarial", &cfg) == SCOMP_OK);
  REQUIRE(scomp_config_set_trials(cfg, 1) == SCOMP_OK);
  int passed = 0, exceeded = 1;
  REQUIRE(scomp_selftest(cfg, &out, &passed, &exceeded) == SCOMP_OK);
  scomp_string_free(out);
  CHECK(passed == 1);
  CHECK(exceeded == 0);
  scomp_config_free(cfg);
}
