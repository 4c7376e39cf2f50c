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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "scomp/distance.hpp"
#include "scomp/error.hpp"
#include "scomp/numeric.hpp"
#include "scomp/parallel.hpp"
#include "scomp/select.hpp"

using namespace scomp;

namespace {

ScheffeOptions mc(std::size_t budget = 20000) {
  return {budget, ScheffeBackend::kMonteCarlo};
}
ScheffeOptions exact() { return {0, ScheffeBackend::kExact1D}; }

}  // namespace

TEST_CASE("Scheffe stats examples") {
  SeededRng rng(1);
  auto f = make_gaussian1d(0, 1);
  auto test = draw_samples(*f, 500, rng);
  for (auto opt : {mc(), exact()}) {
    auto s = empirical_scheffe_stats(*f, *f, test, opt, rng);
    CHECK(s.mass_i == 0.0);
    CHECK(s.mass_j == 0.0);
    CHECK(s.empirical == 0.0);
    auto far = empirical_scheffe_stats(*f, *make_gaussian1d(10, 1), test, opt, rng);
    CHECK(far.mass_i >= 0.999);
    CHECK(far.empirical >= 0.99);
  }
  auto u = make_uniform1d(0, 1), v = make_uniform1d(0.5, 1.5);
  SeededRng r2(2);
  auto ut = draw_samples(*u, 2000, r2);
  auto s = empirical_scheffe_stats(*u, *v, ut, exact(), rng);
  CHECK(s.mass_i == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.mass_j == 0.0);
  CHECK(std::abs(s.empirical - 0.5) <= 3 / std::sqrt(2000.0));
  auto m = empirical_scheffe_stats(*u, *v, ut, mc(), rng);
  CHECK(std::abs(m.mass_i - 0.5) <= 3 * 0.5 / std::sqrt(20000.0));
  CHECK(m.empirical == s.empirical);
}

TEST_CASE("exact and Monte Carlo masses agree") {
  SeededRng rng(3);
  NoiseModel noise = NoiseModel::gaussian(0.2);
  std::vector<std::pair<DensityHandle, DensityHandle>> pairs = {
      {make_gaussian1d(0, 1), make_gaussian1d(0.3, 2)},
      {make_uniform1d(0, 1), make_mixture({0.3, 0.7}, {make_uniform1d(-1, 0.2), make_uniform1d(0.5, 2)})},
      {convolve_noise(make_uniform1d(0, 1), noise), convolve_noise(make_uniform1d(0.2, 1.5), noise)},
      {make_mixture({0.5, 0.5}, {make_gaussian1d(-1, 0.5), make_gaussian1d(1, 0.5)}), make_gaussian1d(0, 1)},
  };
  for (auto& [f, g] : pairs) {
    auto test = draw_samples(*f, 3000, rng);
    auto e = empirical_scheffe_stats(*f, *g, test, exact(), rng);
    auto m = empirical_scheffe_stats(*f, *g, test, mc(200000), rng);
    double se = 0.5 / std::sqrt(200000.0);
    CHECK(std::abs(e.mass_i - m.mass_i) <= 4 * se + 1e-4);
    CHECK(std::abs(e.mass_j - m.mass_j) <= 4 * se + 1e-4);
    CHECK(std::abs(e.empirical - m.empirical) <= 2.0 / 3000);
    // TV is the largest Scheffe gap between f and g.
    CHECK(e.mass_i - e.mass_j == doctest::Approx(distance(*f, *g, Metric::kTV).value).epsilon(2e-4));
  }
}

TEST_CASE("tournament basics") {
  SeededRng rng(4);
  auto f = make_gaussian1d(0, 1);
  auto test = draw_samples(*f, 500, rng);
  auto one = select_min_distance({f}, test, mc(), rng);
  CHECK(one.chosen_index == 0);
  auto dup = select_min_distance({f, f}, test, mc(), rng);
  CHECK(dup.chosen_index == 0);
  CHECK(dup.distinct_candidates == 1);
  CHECK_THROWS_AS(select_min_distance({}, test, mc(), rng), Error);
  int wins = 0;
  for (int seed = 0; seed < 200; ++seed) {
    SeededRng r(seed);
    auto t = draw_samples(*f, 500, r);
    wins += select_min_distance({f, make_gaussian1d(10, 1)}, t, mc(), r).chosen_index == 0;
  }
  CHECK(wins >= 198);
}

TEST_CASE("tournament is deterministic and permutation-equivariant") {
  SeededRng rng(5);
  std::vector<DensityHandle> c;
  for (int i = 0; i < 12; ++i) c.push_back(make_gaussian1d(rng.uniform(-1, 1), rng.uniform(0.5, 2)));
  auto test = draw_samples(*make_gaussian1d(0.2, 1.1), 400, rng);
  for (auto opt : {mc(5000), exact()}) {
    SeededRng a(77), b(77);
    auto r1 = select_min_distance(c, test, opt, a);
    auto r2 = select_min_distance(c, test, opt, b);
    CHECK(r1.chosen_index == r2.chosen_index);
    CHECK(r1.delta == r2.delta);
    parallel_workers() = 3;
    SeededRng d(77);
    auto r3 = select_min_distance(c, test, opt, d);
    parallel_workers() = 0;
    CHECK(r3.delta == r1.delta);
  }
  // The exact backend has no randomness, so a permutation maps Delta exactly.
  std::vector<std::size_t> perm(c.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::vector<DensityHandle> pc;
  for (auto p : perm) pc.push_back(c[p]);
  SeededRng a(1), b(1);
  auto r1 = select_min_distance(c, test, exact(), a);
  auto r2 = select_min_distance(pc, test, exact(), b);
  CHECK(perm[r2.chosen_index] == r1.chosen_index);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(r2.delta[i] == doctest::Approx(r1.delta[perm[i]]).epsilon(1e-12));
}

TEST_CASE("lattice path agrees with analytic crossings") {
  // Gaussians under Laplace noise take the lattice route; compare against
  // a direct evaluation of the Scheffe sets on a fine scan.
  SeededRng rng(6);
  NoiseModel lap = NoiseModel::laplace(0.3);
  auto f = convolve_noise(make_gaussian1d(0, 1), lap);
  auto g = convolve_noise(make_gaussian1d(0.8, 0.6), lap);
  auto test = draw_samples(*f, 2000, rng);
  auto s = empirical_scheffe_stats(*f, *g, test, exact(), rng);
  double mass = 0;
  const double h = 1e-4;
  for (double x = -15; x < 15; x += h) {
    double a = pdf_eval(*f, {&x, 1}), b = pdf_eval(*g, {&x, 1});
    if (a > b) mass += a * h;
  }
  CHECK(s.mass_i == doctest::Approx(mass).epsilon(1e-3));
}

TEST_CASE("tournament guarantee with planted Gaussians") {
  // M=10 candidates including the truth, n = ceil(log(M^2/delta)/(2 eps^2)).
  const double eps = 0.1, delta = 0.1;
  const int n = static_cast<int>(std::ceil(std::log(100 / delta) / (2 * eps * eps)));
  CHECK(n == 346);
  int good = 0;
  for (int trial = 0; trial < 200; ++trial) {
    SeededRng rng(1000 + trial);
    std::vector<DensityHandle> c;
    std::vector<std::pair<double, double>> params;
    for (int i = 0; i < 10; ++i) params.push_back({rng.uniform(-2, 2), rng.uniform(0.5, 2)});
    auto truth = params[rng.below(10)];
    for (auto [m, s] : params) c.push_back(make_gaussian1d(m, s));
    auto test = draw_samples(*make_gaussian1d(truth.first, truth.second), n, rng);
    auto res = select_min_distance(c, test, exact(), rng);
    double best = 2.0;
    for (auto [m, s] : params) best = std::min(best, 2 * tv_gaussian1d_closed(m, s, truth.first, truth.second));
    auto [cm, cs] = params[res.chosen_index];
    good += 2 * tv_gaussian1d_closed(cm, cs, truth.first, truth.second) <= best + 4 * eps;
  }
  CHECK(good >= 180);
}
