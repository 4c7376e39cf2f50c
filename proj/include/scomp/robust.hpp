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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scomp/compression.hpp"
#include "scomp/densities.hpp"
#include "scomp/grid.hpp"
#include "scomp/select.hpp"

namespace scomp {

// |Phi_G^{-1}(delta)| for one noise coordinate: exact inverse CDF for
// Gaussian noise, b log(1/(2 delta)) for Laplace (delta <= 1/2). Zero for
// the degenerate model.
double inv_cdf_noise(const NoiseModel& noise, double delta);

// Closed-form upper bound sigma sqrt(2 log(1/(sqrt(2 pi) delta))) on the
// Gaussian quantile magnitude; equals inv_cdf_noise for Laplace.
double inv_cdf_noise_bound(const NoiseModel& noise, double delta);

struct AdversaryBudget {
  std::size_t s = 0;
  double C = 0.0;
};

enum class AdversaryKind { kMeanShift, kDecoyCluster, kGreedyConfuser };

// MeanShift:      +C in every coordinate.
// DecoyCluster:   move toward `target` (default: sample mean + C), clipped to
//                 the budget.
// GreedyConfuser: move to the point of the budget box (corners and clipped
//                 decoy centre) where log decoy - log moment-fit Gaussian is
//                 largest. The decoy density defaults to the moment fit
//                 shifted by +C.
struct AdversaryStrategy {
  AdversaryKind kind = AdversaryKind::kMeanShift;
  std::optional<std::vector<double>> target;

  std::string name() const;
  static AdversaryStrategy from_name(const std::string& name);
};

struct CorruptionRecord {
  PointSet samples;
  std::vector<bool> mask;
};

// Corrupts min(s, n) rows chosen uniformly at random.
CorruptionRecord corrupt_adversarial(const PointSet& samples,
                                     const AdversaryBudget& budget,
                                     const AdversaryStrategy& strategy,
                                     const Density* decoy, SeededRng& rng);

// Compression block [0, compression) and 2s+1 equal test groups after it;
// leftover samples are dropped.
struct GroupPartition {
  std::size_t compression = 0;
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
};
GroupPartition partition_groups(std::size_t n, std::size_t compression,
                                std::size_t s);

using DistanceOracle = std::function<double(const Density&, const Density&)>;

// L1 distance by quadrature (d <= 2) or Monte Carlo.
DistanceOracle default_l1_oracle(std::uint64_t seed = 0);

// Maximum clique of {i ~ j : oracle(h_i, h_j) <= threshold}; the
// lexicographically smallest one when several are maximum. Throws
// kGuaranteeFailure when it is smaller than min_size.
std::vector<std::size_t> find_clique(const std::vector<DensityHandle>& hypotheses,
                                     double threshold, std::size_t min_size,
                                     const DistanceOracle& oracle);

// Non-robust baseline: isotropic Gaussian from the sample mean and the
// coordinate-averaged (1/n) variance.
DensityHandle moment_decoder(const PointSet& samples);

struct LearnerOptions {
  double epsilon = 0.1;
  double delta = 0.1;
  // Compression block size; otherwise sqrt_factor * sqrt(n) when positive,
  // otherwise m(eps/2) log(1/delta). Always clamped to [tau, n/2].
  std::optional<std::size_t> compression_size;
  double compression_sqrt_factor = 0.0;
  std::optional<std::size_t> cap = 2000000;
  ScheffeOptions scheffe;
  // Clique thresholds eps' = eps * eps_prime, eps'' = eps * eps_dprime.
  double eps_prime = 1.0 / 6.0;
  double eps_dprime = 1.0 / 24.0;
  // When false, a missing clique is returned as clique_found = false instead
  // of throwing.
  bool throw_on_guarantee_failure = true;
};

struct LearnResult {
  DensityHandle estimate;
  std::optional<Candidate> winner;
  std::size_t candidate_count = 0;
  double space_size = 0.0;
  std::size_t invalid = 0;
  bool truncated = false;
  std::size_t compression_size = 0;
  std::optional<QuantGrid> grid;
  // Adversarial regime only.
  bool clique_found = true;
  std::vector<std::size_t> clique;
  std::vector<DensityHandle> group_winners;

  nlohmann::json audit() const;
};

std::size_t compression_block_size(std::size_t n, const SchemeProfile& scheme,
                                   const LearnerOptions& options);

// Grid used by learn_noisy: half-range |Phi^{-1}(delta/(4 n_c d))|, spacing
// eta = eps / (r sqrt(d tau)).
QuantGrid noisy_grid(const SchemeProfile& scheme, const NoiseModel& noise,
                     double epsilon, double delta, std::size_t compression);
// Grid used by learn_adversarial: {-C..C} with eta = eps / (r sqrt(d s)),
// plus 0.
QuantGrid adversarial_grid(const SchemeProfile& scheme, double C,
                           double epsilon, std::size_t s);

LearnResult learn_clean(const PointSet& samples, const SchemeProfile& scheme,
                        const LearnerOptions& options, SeededRng& rng);

// Returns the unconvolved winner.
LearnResult learn_noisy(const PointSet& noisy_samples,
                        const SchemeProfile& scheme, const NoiseModel& noise,
                        const LearnerOptions& options, SeededRng& rng);

LearnResult learn_adversarial(const PointSet& samples, std::size_t s,
                              const SchemeProfile& scheme, double C,
                              const LearnerOptions& options, SeededRng& rng);

}  // namespace scomp
