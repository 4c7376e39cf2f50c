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
#include <numbers>
#include <vector>

#include "doctest.h"
#include "scomp/densities.hpp"
#include "scomp/distance.hpp"
#include "scomp/error.hpp"
#include "scomp/numeric.hpp"
#include "scomp/parallel.hpp"

using namespace scomp;

namespace {

// Composite Simpson rule, kept independent of the library quadrature.
template <class F>
double simpson(F f, double a, double b, int n = 200000) {
  double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double pdf1(const DensityHandle& f, double x) { return pdf_eval(*f, {&x, 1}); }

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return best;
}

DensityHandle random_1d(SeededRng& rng) {
  switch (rng.below(3)) {
    case 0: return make_gaussian1d(rng.uniform(-2, 2), rng.uniform(0.3, 2));
    case 1: {
      double lo = rng.uniform(-2, 1);
      return make_uniform1d(lo, lo + rng.uniform(0.5, 3));
    }
    default: {
      double w = rng.uniform(0.2, 0.8);
      double lo = rng.uniform(-2, 0);
      return make_mixture({w, 1 - w}, {make_gaussian1d(rng.uniform(-2, 2), rng.uniform(0.3, 1.5)),
                                       make_uniform1d(lo, lo + rng.uniform(0.5, 2))});
    }
  }
}

}  // namespace

TEST_CASE("pdf examples") {
  CHECK(pdf1(make_gaussian1d(0, 1), 0.0) == doctest::Approx(1 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-14));
  auto box = make_box({0, 0}, {1, 1}, 1.0);
  double p[2] = {0.5, 0.5};
  CHECK(pdf_eval(*box, p) == 1.0);
  auto mix = make_mixture({0.5, 0.5}, {make_uniform1d(0, 1), make_uniform1d(1, 2)});
  CHECK(pdf1(mix, 1.5) == 0.5);
  double q[1] = {0.0};
  CHECK_THROWS_AS(pdf_eval(*box, q), Error);
}

TEST_CASE("construction invariants") {
  CHECK_THROWS_AS(make_gaussian1d(0, 0), Error);
  CHECK_THROWS_AS(make_box({0}, {0.5}, 1.0), Error);
  CHECK_THROWS_AS(make_mixture({0.7, 0.3001}, {make_uniform1d(0, 1), make_uniform1d(1, 2)}), Error);
  CHECK_THROWS_AS(make_mixture({0.5, 0.5}, {make_uniform1d(0, 1), make_box({0, 0}, {1, 1}, 1)}), Error);
}

TEST_CASE("sampling is deterministic and supported") {
  auto u = make_uniform1d(0, 1);
  SeededRng a(7), b(7);
  auto xs = draw_samples(*u, 100, a);
  auto ys = draw_samples(*u, 100, b);
  CHECK(xs == ys);
  for (double v : xs.data()) CHECK((v >= 0.0 && v <= 1.0));
  SeededRng r(1);
  auto g = draw_samples(*make_gaussian1d(0, 1), 100000, r);
  double mean = 0;
  for (double v : g.data()) mean += v;
  CHECK(std::abs(mean / 1e5) < 0.02);
}

TEST_CASE("total mass by Monte Carlo") {
  SeededRng rng(3);
  for (int t = 0; t < 10; ++t) {
    auto f = random_1d(rng);
    // Uniform proposal over the support: estimate of int f.
    Box b = f->effective_support();
    double len = b.upper[0] - b.lower[0];
    const int n = 20000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      double v = pdf1(f, rng.uniform(b.lower[0], b.upper[0])) * len;
      s += v;
      s2 += v * v;
    }
    double mean = s / n;
    double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0) <= 3 * se + 1e-9);
  }
}

TEST_CASE("convolution closed forms") {
  auto n2 = convolve_noise(make_gaussian1d(0, 1), NoiseModel::gaussian(1.0));
  REQUIRE(n2->kind() == DensityKind::kIsoGaussian);
  CHECK(static_cast<const IsoGaussian&>(*n2).sigma() == doctest::Approx(std::sqrt(2.0)));

  auto sb = convolve_noise(make_uniform1d(0, 1), NoiseModel::gaussian(0.2));
  for (double x : {-0.3, 0.0, 0.5, 0.9, 1.4}) {
    double ref = simpson([&](double z) { return (z >= x - 1 && z <= x ? 1.0 : 0.0) *
                                                numeric::normal_pdf(z / 0.2) / 0.2; },
                         -2.0, 2.0, 400000);
    // Simpson on a discontinuous integrand converges slowly; compare to the
    // smooth form too.
    double smooth = numeric::normal_cdf(x / 0.2) - numeric::normal_cdf((x - 1) / 0.2);
    CHECK(pdf1(sb, x) == doctest::Approx(smooth).epsilon(1e-12));
    CHECK(std::abs(pdf1(sb, x) - ref) < 1e-4);
  }
  // The cdf of the smoothed box integrates its pdf.
  for (double x : {-0.5, 0.3, 1.2}) {
    double ref = simpson([&](double y) { return pdf1(sb, y); }, -3.0, x, 20000);
    CHECK(sb->cdf(x) == doctest::Approx(ref).epsilon(1e-9));
  }
  auto lap = convolve_noise(make_uniform1d(0, 1), NoiseModel::laplace(0.3));
  double ref = simpson([&](double z) { return 0.5 / 0.3 * std::exp(-std::abs(z) / 0.3); }, 0.5 - 1, 0.5, 20000);
  CHECK(pdf1(lap, 0.5) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("numeric convolution matches quadrature oracle") {
  auto lapg = convolve_noise(make_gaussian1d(0.3, 0.7), NoiseModel::laplace(0.5));
  REQUIRE(lapg->evaluable());
  for (double x : {-1.0, 0.3, 2.0}) {
    double ref = simpson([&](double z) {
      return numeric::normal_pdf((x - z - 0.3) / 0.7) / 0.7 * 0.5 / 0.5 * std::exp(-std::abs(z) / 0.5);
    }, -20, 20, 200000);
    CHECK(pdf1(lapg, x) == doctest::Approx(ref).epsilon(1e-6));
  }
  for (double x : {-30.0, -1.0, 0.3, 2.0, 25.0}) {
    double ref = simpson([&](double y) { return pdf1(lapg, y); }, -40, x, 200000);
    CHECK(lapg->cdf(x) == doctest::Approx(ref).epsilon(1e-7));
  }
  // Narrow Laplace relative to the Gaussian stresses the tail arithmetic.
  auto sharp = convolve_noise(make_gaussian1d(0, 1), NoiseModel::laplace(0.01));
  CHECK(pdf1(sharp, 3.0) == doctest::Approx(numeric::normal_pdf(3.0)).epsilon(1e-3));
  CHECK(pdf1(sharp, 40.0) >= 0.0);
  auto big = convolve_noise(convolve_noise(make_gaussian({0, 0, 0}, 1.0), NoiseModel::laplace(0.5, 3)),
                            NoiseModel::gaussian(0.5, 3));
  double p[3] = {0, 0, 0};
  CHECK_THROWS_AS(pdf_eval(*big, p), Error);
  SeededRng rng(1);
  CHECK(draw_samples(*big, 10, rng).size() == 10);
}

TEST_CASE("sampling a convolution equals base plus noise in distribution") {
  auto base = make_uniform1d(0, 1);
  NoiseModel noise = NoiseModel::gaussian(0.2);
  auto conv = convolve_noise(base, noise);
  SeededRng r1(11), r2(12);
  auto a = draw_samples(*conv, 10000, r1);
  std::vector<double> b;
  for (int i = 0; i < 10000; ++i) b.push_back(r2.uniform() + 0.2 * r2.normal());
  CHECK(ks_statistic(a.data(), b) < 0.05);
}

TEST_CASE("degenerate noise returns the density itself") {
  auto f = make_uniform1d(0, 1);
  CHECK(convolve_noise(f, NoiseModel::gaussian(0.0)) == f);
}

TEST_CASE("json round trip") {
  auto f = make_mixture({0.25, 0.75}, {make_gaussian1d(1, 2), convolve_noise(make_uniform1d(0, 1), NoiseModel::laplace(0.3))});
  auto j = density_to_json(*f);
  auto g = density_from_json(j);
  CHECK(density_to_json(*g) == j);
  for (double x : {-1.0, 0.4, 3.0}) CHECK(pdf1(f, x) == pdf1(g, x));
}

TEST_CASE("distance examples") {
  auto n01 = make_gaussian1d(0, 1);
  CHECK(distance(*n01, *n01, Metric::kTV).value == 0.0);
  CHECK(distance(*make_uniform1d(0, 1), *make_uniform1d(0.5, 1.5), Metric::kTV).value ==
        doctest::Approx(0.5).epsilon(1e-9));
  double closed = 2 * numeric::normal_cdf(0.5) - 1;
  CHECK(closed == doctest::Approx(0.38292).epsilon(1e-5));
  CHECK(tv_gaussian1d_closed(0, 1, 1, 1) == doctest::Approx(closed).epsilon(1e-14));
  CHECK(distance(*n01, *make_gaussian1d(1, 1), Metric::kTV).value ==
        doctest::Approx(closed).epsilon(1e-9));
  CHECK(tv_gaussian1d_closed(0, 1, 0, 1) == 0.0);
  // Crossings at +-x0 with x0^2 = 8 log(2) / 3; f1 is above in between.
  double x0 = std::sqrt(8 * std::log(2.0) / 3);
  double ref = std::erf(x0 / std::sqrt(2.0)) - std::erf(x0 / 2 / std::sqrt(2.0));
  CHECK(tv_gaussian1d_closed(0, 1, 0, 2) == doctest::Approx(ref).epsilon(1e-10));
  CHECK(distance(*n01, *make_gaussian1d(0, 2), Metric::kTV).value == doctest::Approx(ref).epsilon(1e-8));
  CHECK(tv_gaussian1d_closed(0.3, 0.5, -1, 1.7) ==
        doctest::Approx(0.5 * simpson([](double x) {
          return std::abs(numeric::normal_pdf((x - 0.3) / 0.5) / 0.5 -
                          numeric::normal_pdf((x + 1) / 1.7) / 1.7);
        }, -20, 20, 400000)).epsilon(1e-9));
}

TEST_CASE("metric relations") {
  SeededRng rng(5);
  for (int t = 0; t < 20; ++t) {
    auto f = random_1d(rng), g = random_1d(rng);
    double tv = distance(*f, *g, Metric::kTV).value;
    double l1 = distance(*f, *g, Metric::kL1).value;
    CHECK((tv >= 0.0 && tv <= 1.0));
    CHECK(std::abs(l1 - 2 * tv) <= 1e-12);
    CHECK(std::abs(distance(*g, *f, Metric::kTV).value - tv) <= 1e-8);
    auto mc = distance(*f, *g, Metric::kTV, DistanceMethod::kMonteCarlo, 100000, t);
    CHECK(mc.std_error <= 1 / std::sqrt(1e5));
    CHECK(std::abs(mc.value - tv) <= 3 * mc.std_error + 1e-3);
    auto mc2 = distance(*g, *f, Metric::kTV, DistanceMethod::kMonteCarlo, 100000, t + 100);
    CHECK(std::abs(mc.value - mc2.value) <= 3 * std::hypot(mc.std_error, mc2.std_error) + 1e-3);
  }
}

TEST_CASE("L2 distance against oracle") {
  auto f = make_gaussian1d(0, 1), g = make_gaussian1d(0.5, 1.3);
  double ref = std::sqrt(simpson([&](double x) {
    double d = pdf1(f, x) - pdf1(g, x);
    return d * d;
  }, -20, 20));
  CHECK(distance(*f, *g, Metric::kL2).value == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("2D quadrature distance") {
  auto a = make_box({0, 0}, {1, 1}, 1), b = make_box({0.5, 0}, {1.5, 1}, 1);
  CHECK(distance(*a, *b, Metric::kTV).value == doctest::Approx(0.5).epsilon(1e-7));
  auto g1 = make_gaussian({0, 0}, 1), g2 = make_gaussian({1, 0}, 1);
  CHECK(distance(*g1, *g2, Metric::kTV).value == doctest::Approx(tv_gaussian1d_closed(0, 1, 1, 1)).epsilon(1e-6));
}

TEST_CASE("monte carlo determinism is independent of worker count") {
  auto f = make_gaussian({0, 0, 0}, 1), g = make_gaussian({0.5, 0, 0}, 1.2);
  auto a = distance(*f, *g, Metric::kTV, DistanceMethod::kMonteCarlo, 50000, 9);
  parallel_workers() = 3;
  auto b = distance(*f, *g, Metric::kTV, DistanceMethod::kMonteCarlo, 50000, 9);
  parallel_workers() = 0;
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("triangle inequality and data processing") {
  SeededRng rng(17);
  for (int t = 0; t < 100; ++t) {
    auto f = random_1d(rng), g = random_1d(rng), h = random_1d(rng);
    double fg = distance(*f, *g, Metric::kTV).value;
    double gh = distance(*g, *h, Metric::kTV).value;
    double fh = distance(*f, *h, Metric::kTV).value;
    CHECK(fh <= fg + gh + 1e-8);
    NoiseModel noise = rng.below(2) ? NoiseModel::gaussian(rng.uniform(0.05, 1))
                                    : NoiseModel::laplace(rng.uniform(0.05, 1));
    double smoothed = distance(*convolve_noise(f, noise), *convolve_noise(g, noise), Metric::kTV).value;
    CHECK(smoothed <= fg + 1e-7);
  }
}
