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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scomp/densities.hpp"
#include "scomp/grid.hpp"
#include "scomp/points.hpp"
#include "scomp/rng.hpp"

namespace scomp {

enum class Family {
  kGaussian1D,
  kGaussianIso,
  kUniformBox,
  kKMixUniform,
  kKMixGaussian,
};

// Family preset: which decoder to use and its fixed parameters.
struct FamilySpec {
  Family family = Family::kGaussian1D;
  std::size_t dim = 1;
  std::size_t k = 1;
  double sigma0 = 1.0;     // Gaussian variance floor (and Lipschitz scale)
  double min_width = 1.0;  // T for uniform boxes
  // Samples per component; 0 picks the family default (2 for Gaussians,
  // 2d for boxes).
  std::size_t tau_base = 0;
  // Multiplies the registered Lipschitz constant.
  double lipschitz_scale = 1.0;

  std::string name() const;
  bool is_mixture() const {
    return family == Family::kKMixUniform || family == Family::kKMixGaussian;
  }
  void validate() const;

  nlohmann::json to_json() const;
  static FamilySpec from_json(const nlohmann::json& j);
  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

// (tau, t, m) for a family, plus its decoder.
class SchemeProfile {
 public:
  explicit SchemeProfile(FamilySpec family);

  const FamilySpec& family() const { return family_; }

  std::size_t tau_base() const;
  std::size_t tau(double epsilon) const;
  // Bits the enumerator walks: b bits for each of the first k-1 weights.
  std::size_t t(double epsilon) const;
  // Bit count as stated for the family, ceil(k log2(4k/eps)) for mixtures.
  std::size_t nominal_t(double epsilon) const;
  // Bits per quantized mixture weight, ceil(log2(4k/eps)); 0 when k == 1.
  std::size_t weight_bits(double epsilon) const;
  // Sample count for which a good (L, B) exists w.p. 1 - delta.
  double m(double epsilon, double delta) const;
  // Local Lipschitz constant r of the decoder.
  double lipschitz() const;

  // Decodes tau chosen samples plus t bits. Throws kInvalidArgument on a
  // degenerate input (equal pair, weight remainder below zero).
  DensityHandle decode(const PointSet& chosen,
                       const std::vector<std::uint8_t>& bits,
                       double epsilon) const;

 private:
  FamilySpec family_;
};

std::shared_ptr<const IsoGaussian> decode_gaussian_pair(double xi, double xj);
std::shared_ptr<const IsoGaussian> decode_gaussian_iso(const PointSet& samples,
                                                       double sigma0);
std::shared_ptr<const UniformBox> decode_uniform_box(const PointSet& samples,
                                                     double min_width);

using BaseDecoder = std::function<DensityHandle(const PointSet&)>;
DensityHandle decode_mixture(const std::vector<PointSet>& groups,
                             const std::vector<double>& weights,
                             const BaseDecoder& base);

// Weights encoded by `bits`: k-1 big-endian words of `per_weight` bits, each
// a multiple of 2^-per_weight; the last weight is the remainder.
std::vector<double> decode_weights(const std::vector<std::uint8_t>& bits,
                                   std::size_t k, std::size_t per_weight);

struct Candidate {
  DensityHandle density;
  std::vector<std::size_t> indices;
  std::vector<std::uint8_t> bits;
  // d * tau offsets subtracted from the chosen samples; empty without a grid.
  std::vector<double> offsets;

  nlohmann::json provenance() const;
};

struct EnumerationRequest {
  double epsilon = 0.1;
  // Overrides t(epsilon) when set.
  std::optional<std::size_t> bit_budget;
  const QuantGrid* grid = nullptr;
  // Unset means unlimited; must be >= 1 when set.
  std::optional<std::size_t> cap = 2000000;
  // Adversarial layout: every zero-offset candidate first, the rest of the
  // cap filled with nonzero offsets on at most max_corrected_slots slots.
  bool zero_offsets_first = false;
  std::size_t max_corrected_slots = 0;
};

struct CandidateSet {
  std::vector<Candidate> candidates;
  // n^tau * 2^t * |grid|^(d tau); may exceed 2^64, hence double.
  double space_size = 0.0;
  // Decodes rejected as degenerate among those attempted.
  std::size_t invalid = 0;
  bool truncated = false;
};

// Lexicographic over (index tuple, bits, offset tuple).
CandidateSet enumerate_candidates(const PointSet& samples,
                                  const SchemeProfile& scheme,
                                  const EnumerationRequest& request,
                                  SeededRng& rng);

// Exact space size when it fits in 64 bits.
std::optional<std::uint64_t> candidate_space_size(std::size_t n,
                                                  std::size_t tau,
                                                  std::size_t t,
                                                  std::size_t grid_size,
                                                  std::size_t dim);

}  // namespace scomp
