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

#include "json.hpp"
#include "scomp/densities.hpp"
#include "scomp/points.hpp"
#include "scomp/rng.hpp"

namespace scomp {

// How candidate masses of Scheffe sets are computed.
//   kMonteCarlo: mass_budget draws from each candidate.
//   kExact1D:    1D only; Scheffe sets as unions of intervals (closed-form
//                crossings for Gaussian pairs, breakpoints for piecewise
//                constant densities, a shared pdf lattice otherwise) and
//                masses from CDFs.
//   kAuto:       kExact1D when every candidate is 1D with a CDF.
enum class ScheffeBackend { kAuto, kMonteCarlo, kExact1D };

struct ScheffeOptions {
  std::size_t mass_budget = 20000;
  ScheffeBackend backend = ScheffeBackend::kAuto;
};

struct ScheffeStats {
  double mass_i = 0.0;
  double mass_j = 0.0;
  double empirical = 0.0;
};

// Masses of A_ij = {f_i > f_j} under f_i and f_j, and the fraction of test
// samples in A_ij.
ScheffeStats empirical_scheffe_stats(const Density& fi, const Density& fj,
                                     const PointSet& test,
                                     const ScheffeOptions& options,
                                     SeededRng& rng);

struct ScheffeResult {
  std::size_t chosen_index = 0;
  // Delta_i = max_j |f_i(A_ij) - emp(A_ij)|.
  std::vector<double> delta;
  std::size_t test_sample_count = 0;
  // Distinct densities actually compared (duplicates share one statistic).
  std::size_t distinct_candidates = 0;

  nlohmann::json to_json() const;
};

// Minimum-distance (Scheffe tournament) selection; argmin of Delta with the
// lowest index winning ties.
ScheffeResult select_min_distance(const std::vector<DensityHandle>& candidates,
                                  const PointSet& test,
                                  const ScheffeOptions& options,
                                  SeededRng& rng);

}  // namespace scomp
