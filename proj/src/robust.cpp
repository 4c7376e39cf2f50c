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

#include "scomp/robust.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "scomp/distance.hpp"
#include "scomp/error.hpp"
#include "scomp/numeric.hpp"

namespace scomp {

double inv_cdf_noise(const NoiseModel& noise, double delta) {
  require(delta > 0.0 && delta < 1.0, ErrorCode::kInvalidArgument,
          "delta must lie in (0, 1)");
  if (noise.degenerate()) return 0.0;
  const double tail = std::min(delta, 1.0 - delta);
  if (noise.kind == NoiseKind::kGaussian)
    return noise.scale * std::abs(numeric::normal_quantile(tail));
  return noise.scale * std::log(1.0 / (2.0 * tail));
}

double inv_cdf_noise_bound(const NoiseModel& noise, double delta) {
  require(delta > 0.0 && delta < 1.0, ErrorCode::kInvalidArgument,
          "delta must lie in (0, 1)");
  if (noise.kind == NoiseKind::kLaplace || noise.degenerate())
    return inv_cdf_noise(noise, delta);
  const double arg = 1.0 / (std::sqrt(2.0 * M_PI) * delta);
  return arg <= 1.0 ? 0.0 : noise.scale * std::sqrt(2.0 * std::log(arg));
}

std::string AdversaryStrategy::name() const {
  switch (kind) {
    case AdversaryKind::kMeanShift: return "mean_shift";
    case AdversaryKind::kDecoyCluster: return "decoy_cluster";
    case AdversaryKind::kGreedyConfuser: return "greedy_confuser";
  }
  return "";
}

AdversaryStrategy AdversaryStrategy::from_name(const std::string& name) {
  AdversaryStrategy s;
  if (name == "mean_shift") s.kind = AdversaryKind::kMeanShift;
  else if (name == "decoy_cluster") s.kind = AdversaryKind::kDecoyCluster;
  else if (name == "greedy_confuser") s.kind = AdversaryKind::kGreedyConfuser;
  else fail(ErrorCode::kConfig, "unknown adversary strategy: " + name);
  return s;
}

namespace {

std::vector<double> column_mean(const PointSet& x) {
  std::vector<double> m(x.dim(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t a = 0; a < x.dim(); ++a) m[a] += x[i][a];
  for (auto& v : m) v /= double(std::max<std::size_t>(1, x.size()));
  return m;
}

double clip(double v, double c) { return std::clamp(v, -c, c); }

}  // namespace

DensityHandle moment_decoder(const PointSet& samples) {
  require(samples.size() >= 2, ErrorCode::kInvalidArgument,
          "moment decoder needs at least two samples");
  const auto mean = column_mean(samples);
  double ss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t a = 0; a < samples.dim(); ++a) {
      const double e = samples[i][a] - mean[a];
      ss += e * e;
    }
  const double var = ss / double(samples.size() * samples.dim());
  require(var > 0.0, ErrorCode::kInvalidArgument, "samples have zero spread");
  return make_gaussian(mean, std::sqrt(var));
}

CorruptionRecord corrupt_adversarial(const PointSet& samples,
                                     const AdversaryBudget& budget,
                                     const AdversaryStrategy& strategy,
                                     const Density* decoy, SeededRng& rng) {
  require(budget.C >= 0.0, ErrorCode::kInvalidArgument, "C must be >= 0");
  CorruptionRecord rec{samples, std::vector<bool>(samples.size(), false)};
  const std::size_t n = samples.size();
  const std::size_t d = samples.dim();
  const std::size_t s = std::min(budget.s, n);
  if (s == 0) return rec;
  if (strategy.target)
    require(strategy.target->size() == d, ErrorCode::kDimensionMismatch,
            "adversary target dimension");
  if (decoy)
    require(decoy->dim() == d, ErrorCode::kDimensionMismatch,
            "decoy density dimension");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < s; ++i)
    std::swap(perm[i], perm[i + rng.below(n - i)]);
  std::vector<std::size_t> rows(perm.begin(), perm.begin() + s);
  std::sort(rows.begin(), rows.end());

  const double C = budget.C;
  std::vector<double> target;
  if (strategy.target) {
    target = *strategy.target;
  } else {
    target = column_mean(samples);
    for (auto& v : target) v += C;
  }

  DensityHandle reference, decoy_owned;
  if (strategy.kind == AdversaryKind::kGreedyConfuser) {
    reference = moment_decoder(samples);
    if (!decoy) {
      auto ref = std::static_pointer_cast<const IsoGaussian>(reference);
      auto mu = ref->mean();
      for (auto& v : mu) v += C;
      decoy_owned = make_gaussian(mu, ref->sigma());
      decoy = decoy_owned.get();
    }
  }

  std::vector<double> y(d), best(d);
  for (std::size_t i : rows) {
    auto x = rec.samples[i];
    switch (strategy.kind) {
      case AdversaryKind::kMeanShift:
        for (std::size_t a = 0; a < d; ++a) x[a] += C;
        break;
      case AdversaryKind::kDecoyCluster:
        for (std::size_t a = 0; a < d; ++a) x[a] += clip(target[a] - x[a], C);
        break;
      case AdversaryKind::kGreedyConfuser: {
        auto score = [&](std::span<const double> p) {
          const double g = decoy->density(p);
          const double f = reference->density(p);
          return std::log(std::max(g, 1e-300)) - std::log(std::max(f, 1e-300));
        };
        double best_score = -std::numeric_limits<double>::infinity();
        const std::size_t corners = d <= 10 ? (std::size_t{1} << d) : 2;
        for (std::size_t m = 0; m <= corners; ++m) {
          for (std::size_t a = 0; a < d; ++a) {
            double step;
            if (m == corners) step = clip(target[a] - x[a], C);
            else if (d <= 10) step = (m >> a) & 1 ? C : -C;
            else step = m ? C : -C;
            y[a] = x[a] + step;
          }
          const double sc = score(y);
          if (sc > best_score) {
            best_score = sc;
            best = y;
          }
        }
        std::copy(best.begin(), best.end(), x.begin());
        break;
      }
    }
    rec.mask[i] = true;
  }
  return rec;
}

GroupPartition partition_groups(std::size_t n, std::size_t compression,
                                std::size_t s) {
  require(compression <= n, ErrorCode::kInvalidArgument,
          "compression block exceeds the sample count");
  const std::size_t count = 2 * s + 1;
  const std::size_t size = (n - compression) / count;
  require(size > 0, ErrorCode::kInvalidArgument,
          "too few samples for 2s+1 test groups");
  GroupPartition p;
  p.compression = compression;
  for (std::size_t g = 0; g < count; ++g)
    p.groups.emplace_back(compression + g * size, compression + (g + 1) * size);
  return p;
}

DistanceOracle default_l1_oracle(std::uint64_t seed) {
  return [seed](const Density& f, const Density& g) {
    return distance(f, g, Metric::kL1, DistanceMethod::kAuto,
                    kDefaultDistanceBudget, seed)
        .value;
  };
}

std::vector<std::size_t> find_clique(const std::vector<DensityHandle>& hypotheses,
                                     double threshold, std::size_t min_size,
                                     const DistanceOracle& oracle) {
  const std::size_t n = hypotheses.size();
  require(n <= 64, ErrorCode::kInvalidArgument, "at most 64 hypotheses");
  require(threshold >= 0.0, ErrorCode::kInvalidArgument, "threshold must be >= 0");
  std::vector<std::uint64_t> adj(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (oracle(*hypotheses[i], *hypotheses[j]) <= threshold) {
        adj[i] |= std::uint64_t{1} << j;
        adj[j] |= std::uint64_t{1} << i;
      }

  // Depth-first in increasing vertex order visits cliques lexicographically,
  // so the first maximum found is the smallest one.
  std::vector<std::size_t> cur, best;
  auto extend = [&](auto& self, std::uint64_t cand) -> void {
    if (cur.size() > best.size()) best = cur;
    if (cur.size() + std::size_t(std::popcount(cand)) <= best.size()) return;
    while (cand) {
      if (cur.size() + std::size_t(std::popcount(cand)) <= best.size()) return;
      const int v = std::countr_zero(cand);
      cand &= cand - 1;
      cur.push_back(std::size_t(v));
      self(self, cand & adj[v]);
      cur.pop_back();
    }
  };
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  extend(extend, all);
  if (best.size() < min_size)
    fail(ErrorCode::kGuaranteeFailure,
         "no clique of size " + std::to_string(min_size) + " (largest " +
             std::to_string(best.size()) + ")");
  return best;
}

std::size_t compression_block_size(std::size_t n, const SchemeProfile& scheme,
                                   const LearnerOptions& options) {
  const std::size_t tau = scheme.tau(options.epsilon);
  double want;
  if (options.compression_size) want = double(*options.compression_size);
  else if (options.compression_sqrt_factor > 0.0)
    want = std::ceil(options.compression_sqrt_factor * std::sqrt(double(n)));
  else
    want = std::ceil(scheme.m(options.epsilon / 2.0, options.delta) *
                     std::log(1.0 / options.delta));
  const double hi = double(n / 2);
  require(hi >= double(tau), ErrorCode::kInvalidArgument,
          "too few samples for the compression block");
  return std::size_t(std::clamp(want, double(tau), hi));
}

QuantGrid noisy_grid(const SchemeProfile& scheme, const NoiseModel& noise,
                     double epsilon, double delta, std::size_t compression) {
  const double d = double(scheme.family().dim);
  const double R = inv_cdf_noise(noise, delta / (4.0 * double(compression) * d));
  const double tau = double(scheme.tau(epsilon / 2.0));
  const double eta = epsilon / (scheme.lipschitz() * std::sqrt(d * tau));
  return build_grid(R, eta);
}

QuantGrid adversarial_grid(const SchemeProfile& scheme, double C,
                           double epsilon, std::size_t s) {
  require(s >= 1, ErrorCode::kInvalidArgument, "grid needs s >= 1");
  const double d = double(scheme.family().dim);
  const double eta = epsilon / (scheme.lipschitz() * std::sqrt(d * double(s)));
  return build_grid(C, eta).with_zero();
}

nlohmann::json LearnResult::audit() const {
  nlohmann::json j;
  j["compression_size"] = compression_size;
  j["candidate_count"] = candidate_count;
  j["space_size"] = space_size;
  j["invalid"] = invalid;
  j["truncated"] = truncated;
  if (grid) j["grid"] = {{"eta", grid->eta}, {"half_range", grid->half_range},
                         {"size", grid->size()}};
  j["clique_found"] = clique_found;
  j["clique"] = clique;
  if (winner) j["winner"] = winner->provenance();
  if (estimate) j["estimate"] = density_to_json(*estimate);
  return j;
}

namespace {

void check_options(const LearnerOptions& o, const PointSet& samples,
                   const SchemeProfile& scheme) {
  require(o.epsilon > 0.0 && o.epsilon < 1.0, ErrorCode::kInvalidArgument,
          "epsilon must lie in (0, 1)");
  require(o.delta > 0.0 && o.delta < 1.0, ErrorCode::kInvalidArgument,
          "delta must lie in (0, 1)");
  require(samples.dim() == scheme.family().dim, ErrorCode::kDimensionMismatch,
          "sample dimension differs from the family");
}

struct Pool {
  CandidateSet set;
  std::vector<DensityHandle> raw;
  std::vector<DensityHandle> compared;
};

Pool build_pool(const PointSet& block, const SchemeProfile& scheme,
                const LearnerOptions& o, const QuantGrid* grid,
                const NoiseModel* noise, std::size_t corrected_slots,
                SeededRng& rng) {
  EnumerationRequest req;
  req.epsilon = o.epsilon;
  req.grid = grid;
  req.cap = o.cap;
  req.zero_offsets_first = corrected_slots > 0;
  req.max_corrected_slots = corrected_slots;
  SeededRng er = rng.substream(1);
  Pool p;
  p.set = enumerate_candidates(block, scheme, req, er);
  require(!p.set.candidates.empty(), ErrorCode::kInfeasible,
          "no valid candidate decoded");
  p.raw.reserve(p.set.candidates.size());
  for (auto& c : p.set.candidates) p.raw.push_back(c.density);
  if (noise && !noise->degenerate()) {
    p.compared.reserve(p.raw.size());
    for (auto& f : p.raw) p.compared.push_back(convolve_noise(f, *noise));
  } else {
    p.compared = p.raw;
  }
  return p;
}

LearnResult finish(const Pool& p, std::size_t winner, std::size_t n_c,
                   std::optional<QuantGrid> grid) {
  LearnResult r;
  r.winner = p.set.candidates[winner];
  r.estimate = p.raw[winner];
  r.candidate_count = p.set.candidates.size();
  r.space_size = p.set.space_size;
  r.invalid = p.set.invalid;
  r.truncated = p.set.truncated;
  r.compression_size = n_c;
  r.grid = std::move(grid);
  return r;
}

LearnResult single_block(const PointSet& samples, const SchemeProfile& scheme,
                         const LearnerOptions& o, std::size_t n_c,
                         const QuantGrid* grid, const NoiseModel* noise,
                         SeededRng& rng) {
  const PointSet block = samples.slice(0, n_c);
  const PointSet test = samples.slice(n_c, samples.size() - n_c);
  Pool p = build_pool(block, scheme, o, grid, noise, 0, rng);
  SeededRng tr = rng.substream(2);
  auto sel = select_min_distance(p.compared, test, o.scheffe, tr);
  LearnResult r = finish(p, sel.chosen_index, n_c,
                         grid ? std::optional<QuantGrid>(*grid) : std::nullopt);
  r.clique = {0};
  return r;
}

}  // namespace

LearnResult learn_clean(const PointSet& samples, const SchemeProfile& scheme,
                        const LearnerOptions& options, SeededRng& rng) {
  check_options(options, samples, scheme);
  const std::size_t n_c = compression_block_size(samples.size(), scheme, options);
  return single_block(samples, scheme, options, n_c, nullptr, nullptr, rng);
}

LearnResult learn_noisy(const PointSet& noisy_samples,
                        const SchemeProfile& scheme, const NoiseModel& noise,
                        const LearnerOptions& options, SeededRng& rng) {
  check_options(options, noisy_samples, scheme);
  require(noise.dim == noisy_samples.dim(), ErrorCode::kDimensionMismatch,
          "noise dimension differs from the samples");
  const std::size_t n_c =
      compression_block_size(noisy_samples.size(), scheme, options);
  const QuantGrid grid =
      noisy_grid(scheme, noise, options.epsilon, options.delta, n_c);
  return single_block(noisy_samples, scheme, options, n_c, &grid, &noise, rng);
}

LearnResult learn_adversarial(const PointSet& samples, std::size_t s,
                              const SchemeProfile& scheme, double C,
                              const LearnerOptions& options, SeededRng& rng) {
  check_options(options, samples, scheme);
  require(C >= 0.0, ErrorCode::kInvalidArgument, "C must be >= 0");
  require(s < samples.size(), ErrorCode::kInvalidArgument, "s must be < n");
  const std::size_t n_c = compression_block_size(samples.size(), scheme, options);
  if (s == 0) return single_block(samples, scheme, options, n_c, nullptr, nullptr, rng);

  const auto part = partition_groups(samples.size(), n_c, s);
  const QuantGrid grid = adversarial_grid(scheme, C, options.epsilon, s);
  Pool p = build_pool(samples.slice(0, n_c), scheme, options, &grid, nullptr,
                      s, rng);

  std::vector<std::size_t> winners;
  std::vector<DensityHandle> hyps;
  for (std::size_t g = 0; g < part.groups.size(); ++g) {
    const auto [lo, hi] = part.groups[g];
    SeededRng tr = rng.substream(2 + g);
    auto sel = select_min_distance(p.compared, samples.slice(lo, hi - lo),
                                   options.scheffe, tr);
    winners.push_back(sel.chosen_index);
    hyps.push_back(p.raw[sel.chosen_index]);
  }

  const double threshold = 2.0 * options.epsilon * options.eps_prime +
                           8.0 * options.epsilon * options.eps_dprime;
  std::vector<std::size_t> clique;
  bool found = true;
  try {
    clique = find_clique(hyps, threshold, s + 1, default_l1_oracle(rng.substream(3 + 2 * s).seed()));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kGuaranteeFailure ||
        options.throw_on_guarantee_failure)
      throw;
    found = false;
  }

  LearnResult r;
  if (found) {
    r = finish(p, winners[clique.front()], n_c, grid);
  } else {
    r.candidate_count = p.set.candidates.size();
    r.space_size = p.set.space_size;
    r.invalid = p.set.invalid;
    r.truncated = p.set.truncated;
    r.compression_size = n_c;
    r.grid = grid;
  }
  r.clique_found = found;
  r.clique = std::move(clique);
  r.group_winners = std::move(hyps);
  return r;
}

}  // namespace scomp
