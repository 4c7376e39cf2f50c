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

#pragma once

#include <cstddef>
#include <vector>

namespace scomp {

// Quantization lattice -R, -R + 2 eta, ... with the last point clamped to R.
struct QuantGrid {
  double eta = 0.0;
  double half_range = 0.0;
  std::vector<double> points;

  std::size_t size() const { return points.size(); }
  bool contains_zero() const;
  // Copy with 0 inserted (sorted) if missing.
  QuantGrid with_zero() const;
  // Distance from y to the nearest point.
  double gap(double y) const;
};

// 1 + ceil(R / eta) points; R == 0 gives {0}.
QuantGrid build_grid(double half_range, double eta);

}  // namespace scomp
