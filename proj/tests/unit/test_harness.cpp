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

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "doctest.h"
#include "scomp/error.hpp"
#include "scomp/harness.hpp"

using namespace scomp;
using nlohmann::json;

namespace {

ExperimentConfig small_clean() {
  ExperimentConfig c;
  c.n = 300;
  c.epsilon = 0.2;
  c.compression_size = 16;
  c.trials = 3;
  c.seed = 99;
  return c;
}

json minimal_json() {
  return {{"family", {{"family", "gaussian1d"}}}, {"n", 200}, {"epsilon", 0.2},
          {"delta", 0.1}};
}

std::optional<ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config schema") {
  auto c = ExperimentConfig::from_json(minimal_json());
  CHECK(c.regime == Regime::kClean);
  CHECK(c.trials == 1);
  CHECK(c.cap == std::optional<std::size_t>(2000000));

  auto back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());

  json noisy = minimal_json();
  noisy["regime"] = {{"kind", "noisy"}, {"noise", {{"kind", "laplace"}, {"scale", 0.3}}}};
  auto nc = ExperimentConfig::from_json(noisy);
  CHECK(nc.noise == NoiseModel::laplace(0.3));

  json adv = minimal_json();
  adv["regime"] = {{"kind", "adversarial"}, {"s", 2}, {"C", 4.0}, {"strategy", "decoy_cluster"}};
  auto ac = ExperimentConfig::from_json(adv);
  CHECK(ac.budget.s == 2);
  CHECK(ac.strategy.kind == AdversaryKind::kDecoyCluster);
  CHECK(ExperimentConfig::from_json(ac.to_json()).to_json() == ac.to_json());
}

TEST_CASE("config errors are config errors") {
  auto bad = [](auto edit) {
    json j = minimal_json();
    edit(j);
    return code_of([&] { ExperimentConfig::from_json(j); });
  };
  CHECK(bad([](json& j) { j.erase("n"); }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["n"] = "many"; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["epsilon"] = 1.5; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["delta"] = 0.0; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["n"] = 20000; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["cap"] = 3000000; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["family"] = {{"family", "iso_gaussian"}, {"dim", 4}}; }) ==
        ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["family"] = {{"family", "nope"}}; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["regime"] = {{"kind", "sideways"}}; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["regime"] = {{"kind", "adversarial"}, {"s", 4}, {"C", 1.0}}; }) ==
        ErrorCode::kConfig);
  CHECK(bad([](json& j) {
          j["regime"] = {{"kind", "adversarial"}, {"s", 1}, {"C", 1.0}, {"strategy", "x"}};
        }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["output"] = {{"format", "xml"}}; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) { j["truth"] = {{"kind", "fixed"}}; }) == ErrorCode::kConfig);
  CHECK(bad([](json& j) {
          j["truth"] = {{"kind", "fixed"},
                        {"density", density_to_json(*make_gaussian({0, 0}, 1))}};
        }) == ErrorCode::kConfig);
  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::kConfig);

}

TEST_CASE("reports are deterministic and byte stable") {
  auto c = small_clean();
  auto a = run_experiment(c), b = run_experiment(c);
  CHECK(a == b);
  CHECK(report_to_csv(a) == report_to_csv(b));
  CHECK(a.rows.size() == 3);
  for (const auto& row : a.rows) {
    CHECK(row.tv_error >= 0.0);
    CHECK(row.tv_error <= 1.0);
    CHECK(row.wall_ms == 0.0);
    CHECK(row.clique_found);
  }

  // Single trials reproduce from their own index.
  auto one = run_trial(c, 2);
  CHECK(one.to_json() == a.rows[2].to_json());

  auto dir = std::filesystem::temp_directory_path() / "scomp_harness_test";
  std::filesystem::create_directories(dir);
  for (auto f : {ReportFormat::kCsv, ReportFormat::kJson}) {
    auto p1 = (dir / "a").string(), p2 = (dir / "b").string();
    emit_report(a, f, p1);
    emit_report(b, f, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(slurp(p1) == report_to_string(a, f));
  }
  CHECK(code_of([&] { emit_report(a, ReportFormat::kCsv, "/nonexistent/dir/x.csv"); }) ==
        ErrorCode::kIo);

  auto csv = report_to_csv(a);
  CHECK(csv.rfind("trial,seed,tv_error,l2_error,candidate_count,truncated,clique_found,wall_ms\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  auto other = c;
  other.seed = 100;
  CHECK(!(run_experiment(other) == a));
}

TEST_CASE("report json round trip") {
  auto r = run_experiment(small_clean());
  r.rows[0].l2_error = std::nan("");
  r.rows[1].l2_bound = 0.25;
  auto back = Report::from_json(json::parse(r.to_json().dump()));
  CHECK(back == r);
  CHECK(std::isnan(back.rows[0].l2_error));
  CHECK(back.rows[1].l2_bound == 0.25);
  CHECK(code_of([] { Report::from_json(json::object()); }) == ErrorCode::kConfig);
}

TEST_CASE("adversarial with no budget matches the clean learner") {
  auto c = small_clean();
  auto adv = c;
  adv.regime = Regime::kAdversarial;
  adv.budget = {0, 10.0};
  CHECK(report_to_csv(run_experiment(c)) == report_to_csv(run_experiment(adv)));

  auto noisy = c;
  noisy.regime = Regime::kNoisy;
  noisy.noise = NoiseModel::gaussian(0.0);
  CHECK(report_to_csv(run_experiment(c)) == report_to_csv(run_experiment(noisy)));
}

TEST_CASE("summary statistics") {
  Report r;
  for (int i = 0; i < 11; ++i) {
    TrialRecord t;
    t.trial = i;
    t.tv_error = 0.1 * i;
    t.l2_error = i == 10 ? std::nan("") : 1.0;
    t.clique_found = i != 10;
    t.l2_bound = 2.0;
    r.rows.push_back(t);
  }
  summarize(r);
  CHECK(r.tv.median == doctest::Approx(0.5));
  CHECK(r.tv.p10 == doctest::Approx(0.1));
  CHECK(r.tv.p90 == doctest::Approx(0.9));
  CHECK(r.l2.count == 10);
  CHECK(r.clique_failures == 1);
  CHECK(r.l2_bound_checked == 10);
  CHECK(r.l2_bound_held == 10);
}

TEST_CASE("sweeps") {
  auto c = small_clean();
  c.trials = 1;
  auto out = sweep(c, SweepField::kN, {100, 200});
  REQUIRE(out.size() == 2);
  CHECK(out[0].config["n"] == 100);
  CHECK(out[1].config["n"] == 200);
  CHECK(out[0].config["seed"] == derive_seed(c.seed, 0));
  CHECK(code_of([&] { sweep(c, SweepField::kN, {}); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { sweep(c, SweepField::kS, {1}); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { sweep(c, SweepField::kSigma, {0.1}); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { sweep(c, SweepField::kN, {10.5}); }) == ErrorCode::kConfig);
  CHECK(code_of([] { sweep_field_from_name("k"); }) == ErrorCode::kConfig);
  CHECK(sweep_field_from_name("C") == SweepField::kC);
}

TEST_CASE("noisy trials carry bounds") {
  ExperimentConfig c;
  c.family = {Family::kUniformBox, 1, 1, 1.0, 1.0};
  c.regime = Regime::kNoisy;
  c.noise = NoiseModel::gaussian(0.2);
  c.truth.fixed = density_to_json(*make_uniform1d(0, 1, 1.0));
  c.n = 2000;
  c.epsilon = 0.15;
  c.compression_size = 8;
  c.cap = 600;
  c.trials = 1;
  auto r = run_experiment(c);
  const auto& row = r.rows[0];
  REQUIRE(row.conv_tv);
  REQUIRE(row.l2_bound);
  REQUIRE(row.tv_bound);
  CHECK(*row.conv_tv <= row.tv_error + 1e-9);
  CHECK(*row.l2_bound > 0.0);
  CHECK(*row.tv_bound > 0.0);
  CHECK(r.l2_bound_checked == 1);
}

TEST_CASE("presets declare their compression sizes") {
  auto all = presets();
  CHECK(all.size() >= 5);
  for (const auto& p : all) {
    CAPTURE(p.name);
    CHECK_NOTHROW(p.config.validate());
    SchemeProfile scheme(p.config.family);
    CHECK(scheme.tau(p.config.epsilon) == p.declared_tau);
    CHECK(scheme.nominal_t(p.config.epsilon) == p.declared_t);
    CHECK(ExperimentConfig::from_json(p.config.to_json()).to_json() == p.config.to_json());
  }
  CHECK(preset("kumm_noisy").declared_t == 10);
  CHECK(code_of([] { preset("missing"); }) == ErrorCode::kConfig);
}

TEST_CASE("certify") {
  CertifyRequest req;
  req.family = {CertFamily::kGaussianIso, 1.0, 1};
  req.alpha = 5.0;
  auto unchecked = certify(req);
  CHECK(!unchecked.measured_ratio);
  CHECK(unchecked.xi < 1.0);

  req.p = make_gaussian1d(0.0, 1.0);
  req.q = make_gaussian1d(0.5, 1.2);
  auto checked = certify(req);
  REQUIRE(checked.measured_ratio);
  CHECK(checked.verified);
  CHECK(*checked.measured_ratio <= checked.xi + 0.02);

  req.family = {CertFamily::kKMixUniform1D, 1.0, 1, 1.0, 1, std::sqrt(0.6)};
  req.alpha = 0.5;
  req.p = make_uniform1d(0.0, 1.0, 1.0);
  req.q = make_uniform1d(0.3, 1.3, 1.0);
  auto bad = certify(req);
  CHECK(!bad.verified);
}

TEST_CASE("selftest") {
  auto c = preset("gaussian1d_adversarial").config;
  c.trials = 2;
  auto r = selftest(c);
  for (const auto& chk : r.checks) {
    CAPTURE(chk.name);
    CAPTURE(chk.detail);
    CHECK(chk.passed);
  }
  CHECK(r.all_passed());
  CHECK(r.adversarial_trials == 2);
  CHECK(!r.failure_rate_exceeded());
  auto j = r.to_json();
  CHECK(j["checks"].size() == r.checks.size());
  CHECK(code_of([] { selftest(small_clean()); }) == ErrorCode::kConfig);
}

TEST_CASE("json front ends for certify and waterfill") {
  json req{{"family", {{"family", "gaussian_iso"}, {"sigma0", 1.0}, {"dim", 1}}},
           {"alphas", {3.0, 4.0}},
           {"p", density_to_json(*make_gaussian1d(0, 1))},
           {"q", density_to_json(*make_gaussian1d(1, 1))}};
  auto out = certify_json(req);
  REQUIRE(out["certificates"].size() == 2);
  CHECK(out["certificates"][0]["xi"].get<double>() ==
        doctest::Approx(std::pow(2.0, 2.5) * std::exp(-4.5)));
  CHECK(out["certificates"][0]["verified"] == true);
  req.erase("q");
  CHECK(code_of([&] { certify_json(req); }) == ErrorCode::kConfig);
  CHECK(code_of([] { certify_json(json{{"alpha", 1.0}}); }) == ErrorCode::kConfig);

  auto wf = waterfill_json(
      {{"envelope", {{"kind", "constant_on_box"}, {"c", 1.0}, {"volume", 1.0}}},
       {"epsilon", 0.5}});
  CHECK(wf["results"][0]["l1_bound"].get<double>() == doctest::Approx(0.5));
  CHECK(code_of([] { waterfill_json({{"envelope", {{"kind", "cone"}}}, {"epsilon", 0.1}}); }) ==
        ErrorCode::kConfig);
  CHECK(code_of([] {
          waterfill_json({{"envelope", {{"kind", "constant_on_box"}, {"c", 1.0}, {"volume", 1.0}}},
                          {"epsilon", 5.0}});
        }) == ErrorCode::kInfeasible);
}

TEST_CASE("summary is invariant to row order") {
  auto r = run_experiment(small_clean());
  auto shuffled = r;
  std::reverse(shuffled.rows.begin(), shuffled.rows.end());
  summarize(shuffled);
  CHECK(shuffled.to_json()["summary"].dump() == r.to_json()["summary"].dump());
}

TEST_CASE("one-trial clean run and an s sweep") {
  ExperimentConfig c;
  c.n = 5000;
  c.seed = 42;
  c.epsilon = 0.1;
  c.compression_sqrt_factor = 0.6;
  auto r = run_experiment(c);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].tv_error >= 0.0);
  CHECK(r.rows[0].tv_error <= 1.0);

  auto adv = preset("gaussian1d_adversarial").config;
  adv.trials = 1;
  adv.n = 300;
  adv.compression_size = 12;
  adv.cap = 300;
  auto out = sweep(adv, SweepField::kS, {0, 1, 2});
  REQUIRE(out.size() == 3);
  CHECK(out[2].config["regime"]["s"] == 2);
}
