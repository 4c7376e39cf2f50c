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

#include "scomp/numeric.hpp"

#include <algorithm>
#include <queue>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "scomp/error.hpp"

namespace scomp::numeric {

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument,
          "normal quantile needs p in (0, 1)");
  // erfc_inv keeps precision in the lower tail where 2p - 1 cancels.
  if (p < 0.5) return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  return std::numbers::sqrt2 * boost::math::erf_inv(2.0 * p - 1.0);
}

namespace {

struct Piece {
  double a, b, value, error, l1;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk_piece(const std::function<double(double)>& f, double a, double b) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  Piece p{a, b, 0.0, 0.0, 0.0};
  p.value = Rule::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
  return p;
}

constexpr std::size_t kMaxPieces = 4000;

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breaks, double tol,
                 double* error_estimate) {
  if (!(b > a)) {
    if (error_estimate) *error_estimate = 0.0;
    return 0.0;
  }
  std::vector<double> nodes{a};
  for (double x : breaks)
    if (x > a && x < b) nodes.push_back(x);
  nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  // Global adaptive subdivision: always split the piece with the largest
  // error until the summed error meets tol relative to the total L1 mass.
  std::priority_queue<Piece> heap;
  double value = 0.0, error = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    Piece p = gk_piece(f, nodes[i], nodes[i + 1]);
    value += p.value;
    error += p.error;
    l1 += p.l1;
    heap.push(p);
  }
  while (error > tol * std::max(l1, 1e-300) && heap.size() < kMaxPieces) {
    Piece worst = heap.top();
    double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    Piece left = gk_piece(f, worst.a, mid);
    Piece right = gk_piece(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  if (error_estimate) *error_estimate = std::max(error, 0.0);
  return value;
}

double integrate2d(const std::function<double(double, double)>& f, double ax,
                   double bx, double ay, double by,
                   std::span<const double> xbreaks,
                   std::span<const double> ybreaks, double tol) {
  auto inner = [&](double x) {
    return integrate([&](double y) { return f(x, y); }, ay, by, ybreaks, tol);
  };
  return integrate(inner, ax, bx, xbreaks, tol);
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), ErrorCode::kInvalidArgument,
          "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace scomp::numeric
