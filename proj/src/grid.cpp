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

#include "scomp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "scomp/error.hpp"

namespace scomp {

QuantGrid build_grid(double half_range, double eta) {
  require(eta > 0.0 && std::isfinite(eta), ErrorCode::kInvalidArgument,
          "grid half-spacing eta must be positive");
  require(half_range >= 0.0 && std::isfinite(half_range),
          ErrorCode::kInvalidArgument, "grid half-range must be nonnegative");
  QuantGrid g;
  g.eta = eta;
  g.half_range = half_range;
  double steps = half_range / eta;
  // Absorb rounding noise so that R / eta = 4 does not become 5 steps.
  auto count = static_cast<std::size_t>(std::ceil(steps - 1e-9));
  require(count < (std::size_t{1} << 26), ErrorCode::kInfeasible,
          "quantization grid too fine for its range");
  g.points.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k)
    g.points.push_back(std::min(-half_range + 2.0 * eta * static_cast<double>(k),
                                half_range));
  // Left-anchored points can overshoot R before the final clamp.
  g.points.erase(std::unique(g.points.begin(), g.points.end()), g.points.end());
  for (double& p : g.points)
    if (std::abs(p) < 1e-12 * std::max(1.0, half_range)) p = 0.0;
  return g;
}

bool QuantGrid::contains_zero() const {
  return std::binary_search(points.begin(), points.end(), 0.0);
}

QuantGrid QuantGrid::with_zero() const {
  QuantGrid out = *this;
  if (!contains_zero())
    out.points.insert(std::lower_bound(out.points.begin(), out.points.end(), 0.0),
                      0.0);
  return out;
}

double QuantGrid::gap(double y) const {
  auto it = std::lower_bound(points.begin(), points.end(), y);
  double best = std::numeric_limits<double>::infinity();
  if (it != points.end()) best = *it - y;
  if (it != points.begin()) best = std::min(best, y - *std::prev(it));
  return best;
}

}  // namespace scomp
