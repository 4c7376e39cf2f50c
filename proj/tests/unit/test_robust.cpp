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
#include "scomp/robust.hpp"

using namespace scomp;

namespace {

double tv_to(const Density& f, double mu, double sigma) {
  auto& g = dynamic_cast<const IsoGaussian&>(f);
  return tv_gaussian1d_closed(g.mean()[0], g.sigma(), mu, sigma);
}

DistanceOracle gaussian_l1() {
  return [](const Density& f, const Density& g) {
    auto& a = dynamic_cast<const IsoGaussian&>(f);
    auto& b = dynamic_cast<const IsoGaussian&>(g);
    return 2.0 * tv_gaussian1d_closed(a.mean()[0], a.sigma(), b.mean()[0], b.sigma());
  };
}

SchemeProfile gauss1d() { return SchemeProfile(FamilySpec{}); }

bool same_density(const Density& a, const Density& b) {
  return density_to_json(a).dump() == density_to_json(b).dump();
}

}  // namespace

TEST_CASE("inverse noise CDF") {
  auto lap = NoiseModel::laplace(1.0);
  CHECK(inv_cdf_noise(lap, 0.5) == doctest::Approx(0.0));
  CHECK(inv_cdf_noise(lap, 1.0 / (2.0 * std::exp(1.0))) == doctest::Approx(1.0));
  CHECK(inv_cdf_noise(NoiseModel::laplace(3.0), 1e-3) ==
        doctest::Approx(3.0 * std::log(500.0)));
  auto g = NoiseModel::gaussian(1.0);
  CHECK(inv_cdf_noise(g, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inv_cdf_noise(g, 0.025) == doctest::Approx(1.959963984540054));
  CHECK(inv_cdf_noise(NoiseModel::gaussian(2.0), 1e-6) ==
        doctest::Approx(2.0 * 4.753424308822899));
  // Mills-ratio form bounds the exact quantile from above.
  for (double d : {1e-2, 1e-4, 1e-8, 1e-12})
    CHECK(inv_cdf_noise_bound(g, d) >= inv_cdf_noise(g, d));
  CHECK(inv_cdf_noise(NoiseModel::gaussian(0.0), 1e-3) == 0.0);
  CHECK_THROWS_AS(inv_cdf_noise(g, 0.0), Error);
  CHECK_THROWS_AS(inv_cdf_noise(g, 1.0), Error);
}

TEST_CASE("grids cover every admissible deviation") {
  auto scheme = SchemeProfile(FamilySpec{Family::kUniformBox, 1, 1, 1.0, 1.0});
  auto ng = noisy_grid(scheme, NoiseModel::gaussian(0.2), 0.15, 0.1, 20);
  CHECK(ng.half_range == doctest::Approx(0.2 * std::abs(numeric::normal_quantile(0.1 / 80))));
  CHECK(ng.eta == doctest::Approx(0.15 / (8.0 * std::sqrt(2.0))));
  auto ag = adversarial_grid(gauss1d(), 50.0, 0.5, 2);
  CHECK(ag.contains_zero());
  CHECK(ag.points.front() == -50.0);
  CHECK(ag.points.back() == 50.0);
  SeededRng rng(4);
  for (int i = 0; i < 2000; ++i) {
    CHECK(ng.gap(rng.uniform(-ng.half_range, ng.half_range)) <= ng.eta + 1e-12);
    CHECK(ag.gap(rng.uniform(-50.0, 50.0)) <= ag.eta + 1e-12);
  }
}

TEST_CASE("corruption contracts") {
  SeededRng rng(11);
  auto x = draw_samples(*make_gaussian1d(0, 1), 50, rng);
  auto same = corrupt_adversarial(x, {0, 5.0}, {}, nullptr, rng);
  CHECK(same.samples == x);
  CHECK(std::none_of(same.mask.begin(), same.mask.end(), [](bool b) { return b; }));

  auto shifted = corrupt_adversarial(x, {2, 3.0}, {}, nullptr, rng);
  int changed = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (shifted.samples[i][0] != x[i][0]) {
      ++changed;
      CHECK(shifted.samples[i][0] - x[i][0] == doctest::Approx(3.0));
      CHECK(shifted.mask[i]);
    } else {
      CHECK_FALSE(shifted.mask[i]);
    }
  }
  CHECK(changed == 2);

  for (int run = 0; run < 100; ++run) {
    const std::size_t d = 1 + run % 3;
    SeededRng r(1000 + run);
    PointSet pts = draw_samples(*make_gaussian(std::vector<double>(d, 0.0), 1.0), 40, r);
    const AdversaryBudget b{std::size_t(r.below(45)), r.uniform(0.0, 10.0)};
    AdversaryStrategy st;
    st.kind = AdversaryKind(run % 3);
    if (run % 6 == 1) st.target = std::vector<double>(d, 100.0);
    auto rec = corrupt_adversarial(pts, b, st, nullptr, r);
    const auto flagged = std::count(rec.mask.begin(), rec.mask.end(), true);
    CHECK(std::size_t(flagged) == std::min<std::size_t>(b.s, pts.size()));
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t a = 0; a < d; ++a) {
        const double dev = std::abs(rec.samples[i][a] - pts[i][a]);
        if (!rec.mask[i]) CHECK(dev == 0.0);
        worst = std::max(worst, dev);
      }
    CHECK(worst <= b.C * (1 + 1e-12));
  }
  CHECK(AdversaryStrategy::from_name("greedy_confuser").kind ==
        AdversaryKind::kGreedyConfuser);
  CHECK_THROWS_AS(AdversaryStrategy::from_name("nope"), Error);
}

TEST_CASE("pigeonhole over every corruption pattern") {
  for (std::size_t s = 1; s <= 3; ++s) {
    const std::size_t gsize = 2;
    const std::size_t comp = 3;
    const std::size_t n = comp + (2 * s + 1) * gsize + 1;
    auto part = partition_groups(n, comp, s);
    REQUIRE(part.groups.size() == 2 * s + 1);
    for (std::size_t g = 0; g + 1 < part.groups.size(); ++g)
      CHECK(part.groups[g].second == part.groups[g + 1].first);
    CHECK(part.groups.front().first == comp);
    CHECK(part.groups.back().second == n - 1);
    // All masks with at most s set bits.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      if (std::size_t(std::popcount(mask)) > s) continue;
      std::size_t clean = 0;
      for (auto [lo, hi] : part.groups) {
        bool dirty = false;
        for (std::size_t i = lo; i < hi; ++i) dirty |= (mask >> i) & 1;
        clean += !dirty;
      }
      CHECK(clean >= s + 1);
    }
  }
  CHECK_THROWS_AS(partition_groups(10, 8, 1), Error);
}

TEST_CASE("clique examples") {
  std::vector<DensityHandle> h = {
      make_gaussian1d(0, 1), make_gaussian1d(20, 1), make_gaussian1d(0.05, 1),
      make_gaussian1d(-40, 1), make_gaussian1d(-0.05, 1)};
  auto c = find_clique(h, 0.1, 3, gaussian_l1());
  CHECK(c == std::vector<std::size_t>{0, 2, 4});
  // Brute force over all 2^5 subsets.
  std::size_t best = 0;
  for (unsigned m = 0; m < 32; ++m) {
    bool ok = true;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        if ((m >> i & 1) && (m >> j & 1) &&
            gaussian_l1()(*h[i], *h[j]) > 0.1)
          ok = false;
    if (ok) best = std::max<std::size_t>(best, std::popcount(m));
  }
  CHECK(c.size() == best);

  std::vector<DensityHandle> same(6, make_gaussian1d(1, 2));
  CHECK(find_clique(same, 0.0, 6, gaussian_l1()).size() == 6);

  try {
    find_clique(h, 0.1, 4, gaussian_l1());
    FAIL("expected a guarantee failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGuaranteeFailure);
  }
}

TEST_CASE("clique search matches brute force on random graphs") {
  SeededRng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<DensityHandle> h;
    for (std::size_t i = 0; i < n; ++i) h.push_back(make_gaussian1d(rng.uniform(0, 3), 1));
    const double thr = rng.uniform(0.2, 1.2);
    auto oracle = gaussian_l1();
    std::vector<std::size_t> best;
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m) {
      std::vector<std::size_t> set;
      for (std::size_t i = 0; i < n; ++i)
        if (m >> i & 1) set.push_back(i);
      bool ok = true;
      for (std::size_t a = 0; a < set.size() && ok; ++a)
        for (std::size_t b = a + 1; b < set.size() && ok; ++b)
          ok = oracle(*h[set[a]], *h[set[b]]) <= thr;
      if (!ok) continue;
      if (set.size() > best.size() || (set.size() == best.size() && set < best))
        best = set;
    }
    CHECK(find_clique(h, thr, 1, oracle) == best);
  }
}

TEST_CASE("planted clique members stay close to the reference") {
  const double eps = 0.3, ep = eps / 6, edp = eps / 24;
  auto oracle = gaussian_l1();
  SeededRng rng(33);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t s = 1 + rng.below(4);
    const double mu0 = rng.uniform(-3, 3), sd0 = rng.uniform(0.5, 2);
    auto ref = make_gaussian1d(mu0, sd0);
    std::vector<DensityHandle> h(2 * s + 1);
    std::vector<std::size_t> order(2 * s + 1);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
      std::swap(order[i], order[i + rng.below(order.size() - i)]);
    for (std::size_t r = 0; r < order.size(); ++r) {
      DensityHandle g;
      if (r <= s) {
        // Planted: L1 to the reference at most ep.
        do {
          g = make_gaussian1d(mu0 + rng.uniform(-0.1, 0.1) * sd0,
                              sd0 * (1 + rng.uniform(-0.05, 0.05)));
        } while (oracle(*g, *ref) > ep);
      } else {
        // Adversarial: parked just beyond the threshold-reachable region.
        g = make_gaussian1d(mu0 + rng.uniform(-1.0, 1.0) * sd0, sd0);
      }
      h[order[r]] = g;
    }
    auto c = find_clique(h, 2 * ep + 8 * edp, s + 1, oracle);
    CHECK(c.size() >= s + 1);
    for (auto i : c) CHECK(oracle(*h[i], *ref) <= 3 * ep + 12 * edp + 1e-12);
  }
}

TEST_CASE("moment decoder") {
  auto f = moment_decoder(PointSet::from_values({1.0, 3.0}));
  auto& g = dynamic_cast<const IsoGaussian&>(*f);
  CHECK(g.mean()[0] == 2.0);
  CHECK(g.sigma() == doctest::Approx(1.0));
  CHECK_THROWS_AS(moment_decoder(PointSet::from_values({1.0, 1.0})), Error);
}

TEST_CASE("degenerate regimes reduce to the clean learner") {
  SeededRng data(5);
  auto x = draw_samples(*make_gaussian1d(1.0, 2.0), 600, data);
  LearnerOptions o;
  o.epsilon = 0.2;
  o.compression_size = 25;
  SeededRng r1(9), r2(9), r3(9);
  auto clean = learn_clean(x, gauss1d(), o, r1);
  auto adv = learn_adversarial(x, 0, gauss1d(), 5.0, o, r2);
  auto noisy = learn_noisy(x, gauss1d(), NoiseModel::gaussian(0.0), o, r3);
  CHECK(same_density(*clean.estimate, *adv.estimate));
  CHECK(same_density(*clean.estimate, *noisy.estimate));
  CHECK(clean.winner->indices == noisy.winner->indices);
  CHECK(clean.candidate_count == 600);
  CHECK(tv_to(*clean.estimate, 1.0, 2.0) < 0.2);
}

TEST_CASE("noisy learner on a smoothed uniform") {
  auto scheme = SchemeProfile(FamilySpec{Family::kUniformBox, 1, 1, 1.0, 1.0});
  auto noise = NoiseModel::gaussian(0.2);
  auto truth = make_uniform1d(0, 1, 1.0);
  auto smoothed = convolve_noise(truth, noise);
  SeededRng data(6);
  auto x = draw_samples(*smoothed, 1500, data);
  LearnerOptions o;
  o.epsilon = 0.15;
  o.compression_size = 8;
  o.cap = 1500;
  SeededRng r(7);
  auto res = learn_noisy(x, scheme, noise, o, r);
  REQUIRE(res.grid);
  const double expect = std::pow(8.0, 2) * std::pow(double(res.grid->size()), 2);
  CHECK(res.space_size == doctest::Approx(expect));
  CHECK(res.truncated);
  CHECK(res.candidate_count + res.invalid == 1500);
  CHECK(res.estimate->kind() == DensityKind::kUniformBox);
  CHECK(distance(*res.estimate, *truth, Metric::kTV).value < 0.25);
  SeededRng again(7);
  auto res2 = learn_noisy(x, scheme, noise, o, again);
  CHECK(same_density(*res.estimate, *res2.estimate));
}

TEST_CASE("adversarial learner recovers through a decoy cluster") {
  SeededRng data(8);
  auto clean = draw_samples(*make_gaussian1d(0, 1), 900, data);
  AdversaryStrategy st;
  st.kind = AdversaryKind::kDecoyCluster;
  auto rec = corrupt_adversarial(clean, {2, 50.0}, st, nullptr, data);
  auto scheme = SchemeProfile(FamilySpec{Family::kGaussian1D, 1, 1, 0.5});
  LearnerOptions o;
  o.epsilon = 0.5;
  o.compression_size = 30;
  o.cap = 1500;
  SeededRng r(10);
  auto res = learn_adversarial(rec.samples, 2, scheme, 50.0, o, r);
  CHECK(res.clique_found);
  CHECK(res.clique.size() >= 3);
  CHECK(res.group_winners.size() == 5);
  CHECK(tv_to(*res.estimate, 0, 1) < 0.2);
  CHECK(tv_to(*moment_decoder(rec.samples), 0, 1) > 0.2);
  CHECK(res.audit()["clique"].size() == res.clique.size());
}
