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

#include "scomp/compression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "scomp/error.hpp"
#include "scomp/parallel.hpp"

namespace scomp {
namespace {

const char* family_name(Family f) {
  switch (f) {
    case Family::kGaussian1D: return "gaussian1d";
    case Family::kGaussianIso: return "gaussian_iso";
    case Family::kUniformBox: return "uniform_box";
    case Family::kKMixUniform: return "kmix_uniform";
    case Family::kKMixGaussian: return "kmix_gaussian";
  }
  return "?";
}

Family family_from_name(const std::string& s) {
  for (Family f : {Family::kGaussian1D, Family::kGaussianIso, Family::kUniformBox,
                   Family::kKMixUniform, Family::kKMixGaussian})
    if (s == family_name(f)) return f;
  fail(ErrorCode::kConfig, "unknown family '" + s + "'");
}

bool checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return !__builtin_mul_overflow(a, b, &out);
}

// Mixed-radix key: tau index digits, t bit digits, d*tau offset digits.
using Key = std::vector<std::uint32_t>;

struct Layout {
  std::size_t n, tau, t, grid, dim;
  std::size_t offset_digits() const { return grid > 0 ? dim * tau : 0; }
  std::size_t width() const { return tau + t + offset_digits(); }
  std::uint32_t radix(std::size_t pos) const {
    if (pos < tau) return static_cast<std::uint32_t>(n);
    if (pos < tau + t) return 2;
    return static_cast<std::uint32_t>(grid);
  }
};

Key key_from_index(const Layout& L, std::uint64_t index) {
  Key k(L.width());
  for (std::size_t pos = k.size(); pos-- > 0;) {
    std::uint32_t r = L.radix(pos);
    k[pos] = static_cast<std::uint32_t>(index % r);
    index /= r;
  }
  return k;
}

Key random_key(const Layout& L, SeededRng& rng) {
  Key k(L.width());
  for (std::size_t pos = 0; pos < k.size(); ++pos)
    k[pos] = static_cast<std::uint32_t>(rng.below(L.radix(pos)));
  return k;
}

// Floyd's algorithm: `count` distinct values from [0, total).
std::vector<std::uint64_t> sample_distinct(std::uint64_t total,
                                           std::size_t count, SeededRng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  for (std::uint64_t j = total - count; j < total; ++j) {
    std::uint64_t v = rng.below(j + 1);
    if (!chosen.insert(v).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// FamilySpec

std::string FamilySpec::name() const { return family_name(family); }

void FamilySpec::validate() const {
  require(dim >= 1, ErrorCode::kConfig, "family dimension must be >= 1");
  require(k >= 1, ErrorCode::kConfig, "mixture order k must be >= 1");
  require(sigma0 > 0.0, ErrorCode::kConfig, "sigma0 must be positive");
  require(min_width > 0.0, ErrorCode::kConfig, "min_width T must be positive");
  require(lipschitz_scale > 0.0, ErrorCode::kConfig,
          "lipschitz_scale must be positive");
  if (family == Family::kGaussian1D)
    require(dim == 1, ErrorCode::kConfig, "gaussian1d is one-dimensional");
  if (!is_mixture())
    require(k == 1, ErrorCode::kConfig, "k > 1 needs a mixture family");
  if (family == Family::kGaussian1D)
    require(tau_base == 0 || tau_base == 2, ErrorCode::kConfig,
            "the pair decoder consumes exactly 2 samples");
}

nlohmann::json FamilySpec::to_json() const {
  return {{"family", name()},         {"dim", dim},
          {"k", k},                   {"sigma0", sigma0},
          {"min_width", min_width},   {"tau_base", tau_base},
          {"lipschitz_scale", lipschitz_scale}};
}

FamilySpec FamilySpec::from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("family"), ErrorCode::kConfig,
          "family preset needs a 'family' field");
  FamilySpec f;
  f.family = family_from_name(j.at("family").get<std::string>());
  f.dim = j.value("dim", f.dim);
  f.k = j.value("k", f.k);
  f.sigma0 = j.value("sigma0", f.sigma0);
  f.min_width = j.value("min_width", f.min_width);
  f.tau_base = j.value("tau_base", f.tau_base);
  f.lipschitz_scale = j.value("lipschitz_scale", f.lipschitz_scale);
  f.validate();
  return f;
}

// ---------------------------------------------------------------------------
// SchemeProfile

SchemeProfile::SchemeProfile(FamilySpec family) : family_(family) {
  family_.validate();
}

std::size_t SchemeProfile::tau_base() const {
  if (family_.tau_base > 0) return family_.tau_base;
  switch (family_.family) {
    case Family::kUniformBox:
    case Family::kKMixUniform: return 2 * family_.dim;
    default: return 2;
  }
}

std::size_t SchemeProfile::tau(double) const { return family_.k * tau_base(); }

std::size_t SchemeProfile::weight_bits(double epsilon) const {
  if (family_.k == 1) return 0;
  return static_cast<std::size_t>(
      std::ceil(std::log2(4.0 * double(family_.k) / epsilon)));
}

std::size_t SchemeProfile::t(double epsilon) const {
  return (family_.k - 1) * weight_bits(epsilon);
}

std::size_t SchemeProfile::nominal_t(double epsilon) const {
  if (!family_.is_mixture()) return 0;
  double k = double(family_.k);
  return static_cast<std::size_t>(std::ceil(k * std::log2(4.0 * k / epsilon)));
}

double SchemeProfile::m(double epsilon, double delta) const {
  const double d = double(family_.dim);
  const double k = double(family_.k);
  const double log_eps = std::max(1.0, std::log(1.0 / epsilon));
  switch (family_.family) {
    case Family::kGaussian1D: return log_eps / epsilon;
    case Family::kGaussianIso:
      return d * std::max(1.0, std::log(2.0 * d)) * log_eps / epsilon;
    case Family::kUniformBox:
      return 2.0 * d / epsilon * std::log(2.0 / delta) *
             std::max(1.0, std::log(3.0 * d));
    case Family::kKMixUniform:
      return 288.0 * d * k / epsilon * std::log(2.0 / delta) *
             std::log(6.0 * k / epsilon) * std::max(1.0, std::log(3.0 * d));
    case Family::kKMixGaussian:
      return d * k * std::max(1.0, std::log(k)) *
             std::max(1.0, std::log(2.0 * d)) / epsilon;
  }
  return 1.0;
}

double SchemeProfile::lipschitz() const {
  const double d = double(family_.dim);
  double r = 0.0;
  switch (family_.family) {
    case Family::kGaussian1D:
    case Family::kGaussianIso:
    case Family::kKMixGaussian:
      r = 1.0 / (family_.sigma0 * std::sqrt(d * std::log(2.0 * d)));
      break;
    case Family::kUniformBox:
    case Family::kKMixUniform: r = 8.0 * d / family_.min_width; break;
  }
  return r * std::sqrt(double(family_.k)) * family_.lipschitz_scale;
}

DensityHandle SchemeProfile::decode(const PointSet& chosen,
                                    const std::vector<std::uint8_t>& bits,
                                    double epsilon) const {
  const std::size_t base = tau_base();
  require(chosen.size() == tau(epsilon), ErrorCode::kInvalidArgument,
          "decoder needs exactly tau samples");
  require(chosen.dim() == family_.dim, ErrorCode::kDimensionMismatch,
          "sample dimension differs from the family dimension");
  BaseDecoder decoder;
  switch (family_.family) {
    case Family::kGaussian1D:
      decoder = [](const PointSet& s) -> DensityHandle {
        return decode_gaussian_pair(s[0][0], s[1][0]);
      };
      break;
    case Family::kGaussianIso:
    case Family::kKMixGaussian:
      decoder = [s0 = family_.sigma0](const PointSet& s) -> DensityHandle {
        return decode_gaussian_iso(s, s0);
      };
      break;
    case Family::kUniformBox:
    case Family::kKMixUniform:
      decoder = [T = family_.min_width](const PointSet& s) -> DensityHandle {
        return decode_uniform_box(s, T);
      };
      break;
  }
  if (family_.k == 1) return decoder(chosen);
  std::vector<PointSet> groups;
  for (std::size_t g = 0; g < family_.k; ++g)
    groups.push_back(chosen.slice(g * base, base));
  return decode_mixture(groups, decode_weights(bits, family_.k, weight_bits(epsilon)),
                        decoder);
}

// ---------------------------------------------------------------------------
// Decoders

std::shared_ptr<const IsoGaussian> decode_gaussian_pair(double xi, double xj) {
  require(xi != xj, ErrorCode::kInvalidArgument,
          "pair decoder needs two distinct samples");
  return std::make_shared<IsoGaussian>(std::vector<double>{0.5 * (xi + xj)},
                                       0.5 * std::abs(xj - xi));
}

std::shared_ptr<const IsoGaussian> decode_gaussian_iso(const PointSet& samples,
                                                       double sigma0) {
  require(!samples.empty(), ErrorCode::kInvalidArgument,
          "Gaussian decoder needs at least one sample");
  require(sigma0 > 0.0, ErrorCode::kInvalidArgument, "sigma0 must be positive");
  const std::size_t d = samples.dim();
  const double n = double(samples.size());
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t c = 0; c < d; ++c) mean[c] += samples[i][c];
  for (double& v : mean) v /= n;
  double sq = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t c = 0; c < d; ++c) {
      double z = samples[i][c] - mean[c];
      sq += z * z;
    }
  // Total squared deviation used as the per-coordinate variance (no /d).
  double var = std::max(sigma0 * sigma0, sq / n);
  return std::make_shared<IsoGaussian>(std::move(mean), std::sqrt(var));
}

std::shared_ptr<const UniformBox> decode_uniform_box(const PointSet& samples,
                                                     double min_width) {
  require(!samples.empty(), ErrorCode::kInvalidArgument,
          "box decoder needs at least one sample");
  const std::size_t d = samples.dim();
  std::vector<double> lo(samples[0].begin(), samples[0].end());
  std::vector<double> hi = lo;
  for (std::size_t i = 1; i < samples.size(); ++i)
    for (std::size_t c = 0; c < d; ++c) {
      lo[c] = std::min(lo[c], samples[i][c]);
      hi[c] = std::max(hi[c], samples[i][c]);
    }
  for (std::size_t c = 0; c < d; ++c) {
    if (hi[c] - lo[c] < min_width) {
      double mid = 0.5 * (lo[c] + hi[c]);
      lo[c] = mid - 0.5 * min_width;
      hi[c] = mid + 0.5 * min_width;
    }
  }
  return std::make_shared<UniformBox>(std::move(lo), std::move(hi), min_width);
}

DensityHandle decode_mixture(const std::vector<PointSet>& groups,
                             const std::vector<double>& weights,
                             const BaseDecoder& base) {
  require(!groups.empty() && groups.size() == weights.size(),
          ErrorCode::kInvalidArgument, "need one weight per sample group");
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0, ErrorCode::kInvalidArgument, "negative mixture weight");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::kInvalidArgument,
          "mixture weights are off the simplex");
  std::vector<DensityHandle> comps;
  for (const auto& g : groups) {
    require(!g.empty(), ErrorCode::kInvalidArgument, "empty sample group");
    comps.push_back(base(g));
  }
  if (comps.size() == 1) return comps.front();
  return make_mixture(weights, std::move(comps));
}

std::vector<double> decode_weights(const std::vector<std::uint8_t>& bits,
                                   std::size_t k, std::size_t per_weight) {
  require(bits.size() >= (k - 1) * per_weight, ErrorCode::kInvalidArgument,
          "too few bits for the mixture weights");
  const double unit = std::ldexp(1.0, -static_cast<int>(per_weight));
  std::vector<double> w(k, 0.0);
  double used = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < per_weight; ++b)
      v = (v << 1) | (bits[i * per_weight + b] & 1u);
    w[i] = double(v) * unit;
    used += w[i];
  }
  require(used <= 1.0, ErrorCode::kInvalidArgument,
          "quantized weights exceed one");
  w[k - 1] = 1.0 - used;
  return w;
}

nlohmann::json Candidate::provenance() const {
  std::string b;
  for (auto v : bits) b.push_back(v ? '1' : '0');
  return {{"indices", indices}, {"bits", b}, {"offsets", offsets}};
}

// ---------------------------------------------------------------------------
// Enumeration

std::optional<std::uint64_t> candidate_space_size(std::size_t n,
                                                  std::size_t tau,
                                                  std::size_t t,
                                                  std::size_t grid_size,
                                                  std::size_t dim) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < tau; ++i)
    if (!checked_mul(total, n, total)) return std::nullopt;
  for (std::size_t i = 0; i < t; ++i)
    if (!checked_mul(total, 2, total)) return std::nullopt;
  if (grid_size > 0)
    for (std::size_t i = 0; i < dim * tau; ++i)
      if (!checked_mul(total, grid_size, total)) return std::nullopt;
  return total;
}

CandidateSet enumerate_candidates(const PointSet& samples,
                                  const SchemeProfile& scheme,
                                  const EnumerationRequest& req,
                                  SeededRng& rng) {
  const double eps = req.epsilon;
  require(eps > 0.0 && eps < 1.0, ErrorCode::kInvalidArgument,
          "epsilon must lie in (0, 1)");
  require(!req.cap || *req.cap >= 1, ErrorCode::kInvalidArgument,
          "candidate cap must be >= 1");
  require(samples.dim() == scheme.family().dim, ErrorCode::kDimensionMismatch,
          "sample dimension differs from the family dimension");
  const std::size_t tau = scheme.tau(eps);
  require(samples.size() >= tau, ErrorCode::kInvalidArgument,
          "fewer samples than the decoder consumes");
  Layout L{samples.size(), tau, req.bit_budget.value_or(scheme.t(eps)),
           req.grid ? req.grid->size() : 0, samples.dim()};
  require(L.t >= scheme.t(eps), ErrorCode::kInvalidArgument,
          "bit budget below the decoder's bit count");
  require(L.grid == 0 || L.grid < (std::size_t{1} << 31),
          ErrorCode::kInvalidArgument, "grid too large");

  CandidateSet out;
  {
    long double total = std::pow((long double)L.n, (long double)L.tau) *
                        std::pow(2.0L, (long double)L.t);
    if (L.grid > 0)
      total *= std::pow((long double)L.grid, (long double)(L.dim * L.tau));
    out.space_size = static_cast<double>(total);
  }
  const auto exact = candidate_space_size(L.n, L.tau, L.t, L.grid, L.dim);
  const std::size_t cap = req.cap.value_or(std::numeric_limits<std::size_t>::max());

  std::vector<Key> keys;
  auto take_space = [&](const Layout& lay, std::optional<std::uint64_t> size,
                        std::size_t budget, SeededRng& r) {
    if (size && *size <= budget) {
      for (std::uint64_t i = 0; i < *size; ++i) keys.push_back(key_from_index(lay, i));
      return false;
    }
    if (size) {
      for (auto i : sample_distinct(*size, budget, r)) keys.push_back(key_from_index(lay, i));
    } else {
      std::set<Key> seen;
      while (seen.size() < budget) seen.insert(random_key(lay, r));
      keys.insert(keys.end(), seen.begin(), seen.end());
    }
    return true;
  };

  const bool tiered = req.zero_offsets_first && L.grid > 0;
  if (!tiered) {
    out.truncated = take_space(L, exact, cap, rng);
  } else {
    const auto& pts = req.grid->points;
    auto zero_it = std::find(pts.begin(), pts.end(), 0.0);
    require(zero_it != pts.end(), ErrorCode::kInvalidArgument,
            "tiered enumeration needs a grid containing 0");
    const auto zero = static_cast<std::uint32_t>(zero_it - pts.begin());
    Layout base{L.n, L.tau, L.t, 0, L.dim};
    SeededRng zr = rng.substream(0);
    bool cut = take_space(base, candidate_space_size(L.n, L.tau, L.t, 0, L.dim),
                          cap, zr);
    for (auto& k : keys) k.resize(L.width(), zero);
    const std::size_t remaining = cap - std::min(cap, keys.size());
    const std::size_t q = std::min(req.max_corrected_slots, L.tau);
    if (!cut && remaining > 0 && q > 0) {
      // Sample offset tuples with 1..q nonzero slots, weighted by count.
      const double per_slot = std::pow(double(L.grid), double(L.dim)) - 1.0;
      std::vector<double> weight(q + 1, 0.0);
      double wsum = 0.0;
      for (std::size_t c = 1; c <= q; ++c) {
        weight[c] = binomial(L.tau, c) * std::pow(per_slot, double(c));
        wsum += weight[c];
      }
      const double restricted =
          wsum * std::pow(double(L.n), double(L.tau)) * std::ldexp(1.0, int(L.t));
      SeededRng sr = rng.substream(1);
      auto corrected = [&](const Key& k) {
        std::size_t c = 0;
        for (std::size_t s = 0; s < L.tau; ++s) {
          bool nz = false;
          for (std::size_t a = 0; a < L.dim; ++a)
            nz |= k[L.tau + L.t + s * L.dim + a] != zero;
          c += nz;
        }
        return c;
      };
      std::set<Key> extra;
      if (restricted <= double(remaining) && exact && *exact <= 50000000ULL) {
        for (std::uint64_t i = 0; i < *exact; ++i) {
          Key k = key_from_index(L, i);
          std::size_t c = corrected(k);
          if (c >= 1 && c <= q) extra.insert(std::move(k));
        }
      } else {
        const std::size_t want = static_cast<std::size_t>(
            std::min<double>(double(remaining), restricted));
        std::size_t attempts = 0;
        while (extra.size() < want && attempts++ < 50 * want + 1000) {
          Key k = random_key(base, sr);
          k.resize(L.width(), zero);
          double u = sr.uniform() * wsum;
          std::size_t c = 1;
          while (c < q && u >= weight[c]) u -= weight[c++];
          // c distinct slots, each with a uniform nonzero offset vector.
          std::vector<std::size_t> slots(L.tau);
          for (std::size_t s = 0; s < L.tau; ++s) slots[s] = s;
          for (std::size_t s = 0; s < c; ++s)
            std::swap(slots[s], slots[s + sr.below(L.tau - s)]);
          for (std::size_t s = 0; s < c; ++s) {
            std::size_t slot = slots[s];
            bool nz = false;
            while (!nz) {
              for (std::size_t a = 0; a < L.dim; ++a) {
                auto v = static_cast<std::uint32_t>(sr.below(L.grid));
                k[L.tau + L.t + slot * L.dim + a] = v;
                nz |= v != zero;
              }
            }
          }
          extra.insert(std::move(k));
        }
      }
      keys.insert(keys.end(), extra.begin(), extra.end());
    }
    out.truncated = !exact || keys.size() < *exact;
  }
  std::sort(keys.begin(), keys.end());

  std::vector<std::optional<Candidate>> slots(keys.size());
  parallel_for(keys.size(), [&](std::size_t i) {
    const Key& k = keys[i];
    Candidate c;
    c.indices.assign(k.begin(), k.begin() + L.tau);
    c.bits.assign(k.begin() + L.tau, k.begin() + L.tau + L.t);
    PointSet chosen(L.dim, L.tau);
    for (std::size_t s = 0; s < L.tau; ++s)
      for (std::size_t a = 0; a < L.dim; ++a) chosen[s][a] = samples[c.indices[s]][a];
    if (L.grid > 0) {
      c.offsets.resize(L.dim * L.tau);
      for (std::size_t j = 0; j < c.offsets.size(); ++j) {
        c.offsets[j] = req.grid->points[k[L.tau + L.t + j]];
        chosen.data()[j] -= c.offsets[j];
      }
    }
    try {
      c.density = scheme.decode(chosen, c.bits, eps);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidArgument) throw;
      return;
    }
    slots[i] = std::move(c);
  });
  out.candidates.reserve(keys.size());
  for (auto& s : slots) {
    if (s) out.candidates.push_back(std::move(*s));
    else ++out.invalid;
  }
  return out;
}

}  // namespace scomp
