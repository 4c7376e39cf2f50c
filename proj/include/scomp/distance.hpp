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
#include <cstdint>
#include <vector>

#include "scomp/densities.hpp"

namespace scomp {

enum class Metric { kTV, kL1, kL2 };
enum class DistanceMethod { kAuto, kQuadrature, kMonteCarlo };

struct DistanceEstimate {
  double value = 0.0;
  // Zero for quadrature results.
  double std_error = 0.0;
};

inline constexpr std::size_t kDefaultDistanceBudget = 100000;

// TV, L1 or L2 distance between two densities of equal dimension.
// kAuto uses quadrature for d <= 2 and Monte Carlo otherwise. The Monte Carlo
// route draws budget/2 points from each of f and g (the balanced mixture
// (f+g)/2) in fixed chunks, so results depend only on `seed`.
DistanceEstimate distance(const Density& f, const Density& g, Metric metric,
                          DistanceMethod method = DistanceMethod::kAuto,
                          std::size_t budget = kDefaultDistanceBudget,
                          std::uint64_t seed = 0);

// Exact TV between N(mu1, sigma1^2) and N(mu2, sigma2^2).
double tv_gaussian1d_closed(double mu1, double sigma1, double mu2, double sigma2);

// Points where the two 1D Gaussian pdfs cross (0, 1 or 2 of them, sorted).
// `first_above_outside` reports whether f1 > f2 holds outside the crossings
// (two roots) or to the left of the crossing (one root).
struct GaussianCrossings {
  std::vector<double> roots;
  bool first_above_outside = false;
};
GaussianCrossings gaussian_crossings(double mu1, double sigma1, double mu2,
                                     double sigma2);

// Quadrature range and breakpoints shared by distance and spectral code.
Box joint_support(const Density& f, const Density& g);
std::vector<double> joint_breaks(const Density& f, const Density& g,
                                 std::size_t axis, double lo, double hi);

}  // namespace scomp
