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

#include "scomp/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scomp/error.hpp"
#include "scomp/numeric.hpp"
#include "scomp/parallel.hpp"

namespace scomp {
namespace {

constexpr std::size_t kChunk = 4096;
constexpr std::size_t kMaxPieces = 4000;

double metric_integrand(Metric metric, double a, double b) {
  double diff = a - b;
  return metric == Metric::kL2 ? diff * diff : std::abs(diff);
}

double finish(Metric metric, double integral) {
  switch (metric) {
    case Metric::kTV: return std::clamp(0.5 * integral, 0.0, 1.0);
    case Metric::kL1: return std::clamp(integral, 0.0, 2.0);
    case Metric::kL2: return std::sqrt(std::max(integral, 0.0));
  }
  return integral;
}

DistanceEstimate quadrature_distance(const Density& f, const Density& g,
                                     Metric metric) {
  require(f.dim() <= 2, ErrorCode::kUnsupported,
          "quadrature distance is only available for d <= 2");
  require(f.evaluable() && g.evaluable(), ErrorCode::kUnsupported,
          "distance needs evaluable pdfs");
  if (&f == &g) return {0.0, 0.0};
  Box box = joint_support(f, g);
  double integral = 0.0;
  if (f.dim() == 1) {
    auto breaks = joint_breaks(f, g, 0, box.lower[0], box.upper[0]);
    integral = numeric::integrate(
        [&](double x) {
          std::span<const double> p(&x, 1);
          return metric_integrand(metric, f.density(p), g.density(p));
        },
        box.lower[0], box.upper[0], breaks, 1e-11);
  } else {
    auto bx = joint_breaks(f, g, 0, box.lower[0], box.upper[0]);
    auto by = joint_breaks(f, g, 1, box.lower[1], box.upper[1]);
    integral = numeric::integrate2d(
        [&](double x, double y) {
          double p[2] = {x, y};
          return metric_integrand(metric, f.density(p), g.density(p));
        },
        box.lower[0], box.upper[0], box.lower[1], box.upper[1], bx, by, 1e-8);
  }
  // L2 distance is reported as the norm, not its square.
  return {finish(metric, integral), 0.0};
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
};

DistanceEstimate monte_carlo_distance(const Density& f, const Density& g,
                                      Metric metric, std::size_t budget,
                                      std::uint64_t seed) {
  require(f.evaluable() && g.evaluable(), ErrorCode::kUnsupported,
          "distance needs evaluable pdfs");
  require(budget >= 2, ErrorCode::kInvalidArgument,
          "Monte Carlo budget must be >= 2");
  if (&f == &g) return {0.0, 0.0};
  const std::size_t per_side = budget / 2;
  const std::size_t chunks = (per_side + kChunk - 1) / kChunk;
  // Stratum 0 draws from f, stratum 1 from g.
  std::vector<Moments> parts(2 * chunks);
  SeededRng root(seed, 0x6d63646973ULL);
  parallel_for(2 * chunks, [&](std::size_t job) {
    const std::size_t side = job / chunks;
    const std::size_t chunk = job % chunks;
    const Density& src = side == 0 ? f : g;
    SeededRng rng = root.substream(job);
    std::size_t lo = chunk * kChunk;
    std::size_t hi = std::min(per_side, lo + kChunk);
    std::vector<double> x(f.dim());
    Moments m;
    for (std::size_t i = lo; i < hi; ++i) {
      src.draw(rng, x);
      double a = f.density(x);
      double b = g.density(x);
      double mix = 0.5 * (a + b);
      double h = mix > 0.0 ? metric_integrand(metric, a, b) / mix : 0.0;
      m.sum += h;
      m.sum_sq += h * h;
      ++m.count;
    }
    parts[job] = m;
  });
  double mean[2] = {0.0, 0.0};
  double var[2] = {0.0, 0.0};
  for (std::size_t side = 0; side < 2; ++side) {
    Moments tot;
    for (std::size_t c = 0; c < chunks; ++c) {
      const auto& m = parts[side * chunks + c];
      tot.sum += m.sum;
      tot.sum_sq += m.sum_sq;
      tot.count += m.count;
    }
    double n = static_cast<double>(tot.count);
    mean[side] = tot.sum / n;
    var[side] = tot.count > 1
                    ? std::max(0.0, (tot.sum_sq - n * mean[side] * mean[side]) /
                                        (n - 1.0))
                    : 0.0;
  }
  const double n = static_cast<double>(per_side);
  double integral = 0.5 * (mean[0] + mean[1]);
  double se = 0.5 * std::sqrt(var[0] / n + var[1] / n);
  switch (metric) {
    case Metric::kTV: return {std::clamp(0.5 * integral, 0.0, 1.0), 0.5 * se};
    case Metric::kL1: return {std::clamp(integral, 0.0, 2.0), se};
    case Metric::kL2: {
      double v = std::sqrt(std::max(integral, 0.0));
      // Delta method for the square root.
      return {v, v > 0.0 ? se / (2.0 * v) : std::sqrt(se)};
    }
  }
  return {integral, se};
}

double normal_mass(double lo, double hi, double mu, double sigma) {
  // P(lo < X < hi) using whichever tail keeps precision.
  double a = (lo - mu) / sigma;
  double b = (hi - mu) / sigma;
  if (a > 0.0) return numeric::normal_cdf(-a) - numeric::normal_cdf(-b);
  return numeric::normal_cdf(b) - numeric::normal_cdf(a);
}

}  // namespace

Box joint_support(const Density& f, const Density& g) {
  Box a = f.effective_support();
  Box b = g.effective_support();
  for (std::size_t i = 0; i < a.lower.size(); ++i) {
    a.lower[i] = std::min(a.lower[i], b.lower[i]);
    a.upper[i] = std::max(a.upper[i], b.upper[i]);
  }
  return a;
}

std::vector<double> joint_breaks(const Density& f, const Density& g,
                                 std::size_t axis, double lo, double hi) {
  std::vector<double> out;
  f.breakpoints(axis, out);
  g.breakpoints(axis, out);
  double scale = std::min(f.smoothness_scale(), g.smoothness_scale());
  if (std::isfinite(scale) && scale > 0.0) {
    double step = std::max(2.0 * scale, (hi - lo) / kMaxPieces);
    for (double x = lo + step; x < hi; x += step) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DistanceEstimate distance(const Density& f, const Density& g, Metric metric,
                          DistanceMethod method, std::size_t budget,
                          std::uint64_t seed) {
  require(f.dim() == g.dim(), ErrorCode::kDimensionMismatch,
          "distance between densities of different dimension");
  if (method == DistanceMethod::kAuto)
    method = f.dim() <= 2 ? DistanceMethod::kQuadrature
                          : DistanceMethod::kMonteCarlo;
  if (method == DistanceMethod::kQuadrature)
    return quadrature_distance(f, g, metric);
  return monte_carlo_distance(f, g, metric, budget, seed);
}

GaussianCrossings gaussian_crossings(double mu1, double sigma1, double mu2,
                                     double sigma2) {
  require(sigma1 > 0.0 && sigma2 > 0.0, ErrorCode::kInvalidArgument,
          "Gaussian scales must be positive");
  GaussianCrossings out;
  const double v1 = sigma1 * sigma1;
  const double v2 = sigma2 * sigma2;
  // f1 > f2  <=>  a x^2 + b x + c > 0.
  const double a = v1 - v2;
  const double b = 2.0 * (v2 * mu1 - v1 * mu2);
  const double c = v1 * mu2 * mu2 - v2 * mu1 * mu1 -
                   2.0 * v1 * v2 * std::log(sigma1 / sigma2);
  if (a == 0.0) {
    if (b != 0.0) {
      out.roots.push_back(-c / b);
      out.first_above_outside = b < 0.0;
    }
    return out;
  }
  double disc = b * b - 4.0 * a * c;
  disc = std::max(disc, 0.0);
  double sq = std::sqrt(disc);
  double qv = -0.5 * (b + std::copysign(sq, b));
  double r1 = qv / a;
  double r2 = qv != 0.0 ? c / qv : r1;
  if (r1 > r2) std::swap(r1, r2);
  out.roots = {r1, r2};
  out.first_above_outside = a > 0.0;
  return out;
}

double tv_gaussian1d_closed(double mu1, double sigma1, double mu2,
                            double sigma2) {
  auto cr = gaussian_crossings(mu1, sigma1, mu2, sigma2);
  const double inf = std::numeric_limits<double>::infinity();
  auto gap = [&](double lo, double hi) {
    return normal_mass(lo, hi, mu1, sigma1) - normal_mass(lo, hi, mu2, sigma2);
  };
  double tv = 0.0;
  if (cr.roots.empty()) return 0.0;
  if (cr.roots.size() == 1) {
    double r = cr.roots[0];
    tv = cr.first_above_outside ? gap(-inf, r) : gap(r, inf);
  } else if (cr.first_above_outside) {
    tv = gap(-inf, cr.roots[0]) + gap(cr.roots[1], inf);
  } else {
    tv = gap(cr.roots[0], cr.roots[1]);
  }
  return std::clamp(tv, 0.0, 1.0);
}

}  // namespace scomp
