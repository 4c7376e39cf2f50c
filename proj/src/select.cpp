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

#include "scomp/select.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>

#include "scomp/distance.hpp"
#include "scomp/error.hpp"
#include "scomp/parallel.hpp"

namespace scomp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBlocks = 64;
constexpr std::size_t kMaxLattice = 1 << 16;

// Union of disjoint open intervals.
struct Interval {
  double lo, hi;
};
using IntervalSet = std::vector<Interval>;

double cdf_at(const Density& f, double x) {
  if (x == -kInf) return 0.0;
  if (x == kInf) return 1.0;
  return f.cdf(x);
}

class Tournament {
 public:
  virtual ~Tournament() = default;
  // |mass_a(A_ab) - emp(A_ab)| and |mass_b(A_ba) - emp(A_ba)|.
  virtual std::pair<double, double> pair_gaps(std::size_t a, std::size_t b) const = 0;
  virtual ScheffeStats stats(std::size_t a, std::size_t b) const = 0;
};

// ---------------------------------------------------------------------------
// Monte Carlo masses

class MonteCarloTournament final : public Tournament {
 public:
  MonteCarloTournament(const std::vector<const Density*>& c, const PointSet& test,
                       std::size_t budget, const SeededRng& rng)
      : c_(c), n_test_(test.size()) {
    require(budget >= 1, ErrorCode::kInvalidArgument, "mass budget must be >= 1");
    for (const auto* f : c_)
      require(f->evaluable(), ErrorCode::kUnsupported,
              "Scheffe statistics need evaluable pdfs");
    const std::size_t m = c_.size();
    draws_.resize(m);
    self_.resize(m);
    test_.resize(m);
    parallel_for(m, [&](std::size_t a) {
      SeededRng r = rng.substream(a);
      draws_[a] = draw_samples(*c_[a], budget, r);
      self_[a].resize(budget);
      for (std::size_t k = 0; k < budget; ++k) self_[a][k] = c_[a]->density(draws_[a][k]);
      test_[a].resize(n_test_);
      for (std::size_t k = 0; k < n_test_; ++k) test_[a][k] = c_[a]->density(test[k]);
    });
  }

  // Fraction of a's draws where f_a > f_b.
  double mass_above(std::size_t a, std::size_t b) const {
    std::size_t hits = 0;
    const auto& pts = draws_[a];
    for (std::size_t k = 0; k < pts.size(); ++k)
      hits += self_[a][k] > c_[b]->density(pts[k]);
    return double(hits) / double(pts.size());
  }

  std::pair<double, double> empirical(std::size_t a, std::size_t b) const {
    std::size_t ab = 0, ba = 0;
    for (std::size_t k = 0; k < n_test_; ++k) {
      ab += test_[a][k] > test_[b][k];
      ba += test_[b][k] > test_[a][k];
    }
    return {double(ab) / double(n_test_), double(ba) / double(n_test_)};
  }

  std::pair<double, double> pair_gaps(std::size_t a, std::size_t b) const override {
    auto [eab, eba] = empirical(a, b);
    return {std::abs(mass_above(a, b) - eab), std::abs(mass_above(b, a) - eba)};
  }

  ScheffeStats stats(std::size_t a, std::size_t b) const override {
    // f_b(A_ab) is the complement of f_b's own mass on {f_b >= f_a}.
    std::size_t hits = 0;
    const auto& pts = draws_[b];
    for (std::size_t k = 0; k < pts.size(); ++k)
      hits += c_[a]->density(pts[k]) > self_[b][k];
    return {mass_above(a, b), double(hits) / double(pts.size()),
            empirical(a, b).first};
  }

 private:
  std::vector<const Density*> c_;
  std::size_t n_test_;
  std::vector<PointSet> draws_;
  std::vector<std::vector<double>> self_;
  std::vector<std::vector<double>> test_;
};

// ---------------------------------------------------------------------------
// Exact 1D masses

class Exact1DTournament final : public Tournament {
 public:
  Exact1DTournament(const std::vector<const Density*>& c, const PointSet& test)
      : c_(c), test_(test.data()) {
    for (const auto* f : c_)
      require(f->dim() == 1 && f->has_cdf(), ErrorCode::kUnsupported,
              "exact Scheffe masses need 1D densities with a CDF");
    std::sort(test_.begin(), test_.end());
    const std::size_t m = c_.size();
    kind_.resize(m);
    bool all_gauss = true, all_piecewise = true;
    for (std::size_t a = 0; a < m; ++a) {
      if (c_[a]->kind() == DensityKind::kIsoGaussian) kind_[a] = Kind::kGauss;
      else if (!std::isfinite(c_[a]->smoothness_scale())) kind_[a] = Kind::kPiecewise;
      else kind_[a] = Kind::kSmooth;
      all_gauss &= kind_[a] == Kind::kGauss;
      all_piecewise &= kind_[a] == Kind::kPiecewise;
    }
    if (all_piecewise) {
      breaks_.resize(m);
      for (std::size_t a = 0; a < m; ++a) {
        c_[a]->breakpoints(0, breaks_[a]);
        std::sort(breaks_[a].begin(), breaks_[a].end());
      }
    }
    if (!all_gauss && !all_piecewise) build_lattice();
  }

  std::pair<double, double> pair_gaps(std::size_t a, std::size_t b) const override {
    IntervalSet ab, ba;
    sets(a, b, ab, ba);
    return {std::abs(mass(a, ab) - empirical(ab)), std::abs(mass(b, ba) - empirical(ba))};
  }

  ScheffeStats stats(std::size_t a, std::size_t b) const override {
    IntervalSet ab, ba;
    sets(a, b, ab, ba);
    return {mass(a, ab), mass(b, ab), empirical(ab)};
  }

 private:
  enum class Kind { kGauss, kPiecewise, kSmooth };

  void build_lattice() {
    double lo = kInf, hi = -kInf, h = kInf;
    for (const auto* f : c_) {
      Box b = f->effective_support();
      lo = std::min(lo, b.lower[0]);
      hi = std::max(hi, b.upper[0]);
      double s = f->smoothness_scale();
      if (std::isfinite(s)) h = std::min(h, s / 4.0);
    }
    if (!std::isfinite(h)) h = (hi - lo) / 4096.0;
    auto count = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
    if (count > kMaxLattice) {
      count = kMaxLattice;
      h = (hi - lo) / double(count - 1);
    }
    lattice_.resize(count);
    for (std::size_t g = 0; g < count; ++g) lattice_[g] = lo + h * double(g);
    table_.assign(c_.size() * count, 0.0);
    parallel_for(c_.size(), [&](std::size_t a) {
      for (std::size_t g = 0; g < count; ++g)
        table_[a * count + g] = c_[a]->density(std::span<const double>(&lattice_[g], 1));
    });
  }

  void sets(std::size_t a, std::size_t b, IntervalSet& ab, IntervalSet& ba) const {
    if (kind_[a] == Kind::kGauss && kind_[b] == Kind::kGauss) {
      gauss_sets(a, b, ab, ba);
    } else if (!breaks_.empty()) {
      piecewise_sets(a, b, ab, ba);
    } else {
      lattice_sets(a, b, ab, ba);
    }
  }

  void gauss_sets(std::size_t a, std::size_t b, IntervalSet& ab, IntervalSet& ba) const {
    const auto& ga = static_cast<const IsoGaussian&>(*c_[a]);
    const auto& gb = static_cast<const IsoGaussian&>(*c_[b]);
    auto cr = gaussian_crossings(ga.mean()[0], ga.sigma(), gb.mean()[0], gb.sigma());
    if (cr.roots.empty()) return;
    IntervalSet outside, inside;
    if (cr.roots.size() == 1) {
      outside = {{-kInf, cr.roots[0]}};
      inside = {{cr.roots[0], kInf}};
    } else {
      outside = {{-kInf, cr.roots[0]}, {cr.roots[1], kInf}};
      inside = {{cr.roots[0], cr.roots[1]}};
    }
    if (cr.first_above_outside) {
      ab = std::move(outside);
      ba = std::move(inside);
    } else {
      ab = std::move(inside);
      ba = std::move(outside);
    }
  }

  static void append(IntervalSet& s, double lo, double hi) {
    if (!s.empty() && s.back().hi == lo) s.back().hi = hi;
    else s.push_back({lo, hi});
  }

  void piecewise_sets(std::size_t a, std::size_t b, IntervalSet& ab, IntervalSet& ba) const {
    std::vector<double> pts;
    pts.reserve(breaks_[a].size() + breaks_[b].size());
    std::merge(breaks_[a].begin(), breaks_[a].end(), breaks_[b].begin(),
               breaks_[b].end(), std::back_inserter(pts));
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      double mid = 0.5 * (pts[i] + pts[i + 1]);
      std::span<const double> x(&mid, 1);
      double fa = c_[a]->density(x), fb = c_[b]->density(x);
      if (fa > fb) append(ab, pts[i], pts[i + 1]);
      else if (fb > fa) append(ba, pts[i], pts[i + 1]);
    }
  }

  void lattice_sets(std::size_t a, std::size_t b, IntervalSet& ab, IntervalSet& ba) const {
    const std::size_t G = lattice_.size();
    const double* ta = &table_[a * G];
    const double* tb = &table_[b * G];
    auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
    double prev = ta[0] - tb[0];
    int s = sign(prev);
    double start = -kInf;
    for (std::size_t g = 1; g < G; ++g) {
      double cur = ta[g] - tb[g];
      int t = sign(cur);
      if (t == s) {
        prev = cur;
        continue;
      }
      // Linear interpolation of the sign change inside [x_{g-1}, x_g].
      double x0 = lattice_[g - 1], x1 = lattice_[g];
      double root = prev == cur ? x0 : x0 + (x1 - x0) * prev / (prev - cur);
      if (s > 0) ab.push_back({start, root});
      else if (s < 0) ba.push_back({start, root});
      start = root;
      s = t;
      prev = cur;
    }
    if (s > 0) ab.push_back({start, kInf});
    else if (s < 0) ba.push_back({start, kInf});
  }

  double mass(std::size_t a, const IntervalSet& set) const {
    double m = 0.0;
    for (const auto& iv : set) m += cdf_at(*c_[a], iv.hi) - cdf_at(*c_[a], iv.lo);
    return std::clamp(m, 0.0, 1.0);
  }

  double empirical(const IntervalSet& set) const {
    std::size_t count = 0;
    for (const auto& iv : set) {
      auto lo = std::upper_bound(test_.begin(), test_.end(), iv.lo);
      auto hi = std::lower_bound(lo, test_.end(), iv.hi);
      count += static_cast<std::size_t>(hi - lo);
    }
    return double(count) / double(test_.size());
  }

  std::vector<const Density*> c_;
  std::vector<double> test_;
  std::vector<Kind> kind_;
  std::vector<std::vector<double>> breaks_;
  std::vector<double> lattice_;
  std::vector<double> table_;
};

bool exact_applicable(const std::vector<const Density*>& c) {
  return std::all_of(c.begin(), c.end(),
                     [](const Density* f) { return f->dim() == 1 && f->has_cdf(); });
}

std::unique_ptr<Tournament> make_tournament(const std::vector<const Density*>& c,
                                            const PointSet& test,
                                            const ScheffeOptions& opt,
                                            const SeededRng& rng) {
  ScheffeBackend backend = opt.backend;
  if (backend == ScheffeBackend::kAuto)
    backend = exact_applicable(c) ? ScheffeBackend::kExact1D : ScheffeBackend::kMonteCarlo;
  if (backend == ScheffeBackend::kExact1D)
    return std::make_unique<Exact1DTournament>(c, test);
  return std::make_unique<MonteCarloTournament>(c, test, opt.mass_budget, rng);
}

}  // namespace

ScheffeStats empirical_scheffe_stats(const Density& fi, const Density& fj,
                                     const PointSet& test,
                                     const ScheffeOptions& options,
                                     SeededRng& rng) {
  require(fi.dim() == fj.dim() && test.dim() == fi.dim(),
          ErrorCode::kDimensionMismatch, "Scheffe inputs differ in dimension");
  require(!test.empty(), ErrorCode::kInvalidArgument, "no test samples");
  auto t = make_tournament({&fi, &fj}, test, options, rng);
  return t->stats(0, 1);
}

nlohmann::json ScheffeResult::to_json() const {
  return {{"chosen_index", chosen_index},
          {"delta", delta},
          {"test_sample_count", test_sample_count},
          {"distinct_candidates", distinct_candidates}};
}

ScheffeResult select_min_distance(const std::vector<DensityHandle>& candidates,
                                  const PointSet& test,
                                  const ScheffeOptions& options,
                                  SeededRng& rng) {
  require(!candidates.empty(), ErrorCode::kInvalidArgument,
          "empty candidate list");
  require(!test.empty(), ErrorCode::kInvalidArgument, "no test samples");
  const std::size_t dim = candidates.front()->dim();
  require(test.dim() == dim, ErrorCode::kDimensionMismatch,
          "test samples differ in dimension from the candidates");
  ScheffeResult result;
  result.test_sample_count = test.size();
  result.delta.assign(candidates.size(), 0.0);
  if (candidates.size() == 1) {
    result.distinct_candidates = 1;
    return result;
  }

  // Identical densities give identical statistics; compare each once.
  std::vector<std::size_t> unique_of(candidates.size());
  std::vector<const Density*> unique;
  {
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      require(candidates[i] != nullptr && candidates[i]->dim() == dim,
              ErrorCode::kDimensionMismatch, "candidates differ in dimension");
      auto [it, fresh] = seen.emplace(candidates[i]->to_json().dump(), unique.size());
      if (fresh) unique.push_back(candidates[i].get());
      unique_of[i] = it->second;
    }
  }
  const std::size_t m = unique.size();
  result.distinct_candidates = m;
  std::vector<double> delta(m, 0.0);
  if (m > 1) {
    auto tour = make_tournament(unique, test, options, rng);
    // Rows are dealt round-robin to fixed blocks; max is order-free, so the
    // result does not depend on the worker count.
    std::vector<std::vector<double>> local(std::min(kBlocks, m), std::vector<double>(m, 0.0));
    parallel_for(local.size(), [&](std::size_t blk) {
      auto& d = local[blk];
      for (std::size_t a = blk; a < m; a += local.size())
        for (std::size_t b = a + 1; b < m; ++b) {
          auto [ga, gb] = tour->pair_gaps(a, b);
          d[a] = std::max(d[a], ga);
          d[b] = std::max(d[b], gb);
        }
    });
    for (const auto& d : local)
      for (std::size_t a = 0; a < m; ++a) delta[a] = std::max(delta[a], d[a]);
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    result.delta[i] = delta[unique_of[i]];
    if (result.delta[i] < result.delta[result.chosen_index]) result.chosen_index = i;
  }
  return result;
}

}  // namespace scomp
