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

#include "scomp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "scomp/distance.hpp"
#include "scomp/error.hpp"
#include "scomp/grid.hpp"
#include "scomp/numeric.hpp"

namespace scomp {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kClean: return "clean";
    case Regime::kNoisy: return "noisy";
    case Regime::kAdversarial: return "adversarial";
  }
  return "";
}

Regime regime_from_name(const std::string& s) {
  if (s == "clean") return Regime::kClean;
  if (s == "noisy") return Regime::kNoisy;
  if (s == "adversarial") return Regime::kAdversarial;
  fail(ErrorCode::kConfig, "unknown regime: " + s);
}

const char* backend_name(ScheffeBackend b) {
  switch (b) {
    case ScheffeBackend::kAuto: return "auto";
    case ScheffeBackend::kMonteCarlo: return "monte_carlo";
    case ScheffeBackend::kExact1D: return "exact1d";
  }
  return "";
}

ScheffeBackend backend_from_name(const std::string& s) {
  if (s == "auto") return ScheffeBackend::kAuto;
  if (s == "monte_carlo") return ScheffeBackend::kMonteCarlo;
  if (s == "exact1d") return ScheffeBackend::kExact1D;
  fail(ErrorCode::kConfig, "unknown Scheffe backend: " + s);
}

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double number_or_nan(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

bool is_uniform_family(Family f) {
  return f == Family::kUniformBox || f == Family::kKMixUniform;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

json TruthSpec::to_json() const {
  if (fixed) return {{"kind", "fixed"}, {"density", *fixed}};
  return {{"kind", "random"},
          {"mean", {mean_lo, mean_hi}},
          {"sigma", {sigma_lo, sigma_hi}},
          {"width", {width_lo, width_hi}}};
}

TruthSpec TruthSpec::from_json(const json& j) {
  TruthSpec t;
  const std::string kind = j.value("kind", std::string("random"));
  if (kind == "fixed") {
    require(j.contains("density"), ErrorCode::kConfig, "fixed truth needs 'density'");
    t.fixed = j.at("density");
    density_from_json(*t.fixed);  // validates
    return t;
  }
  require(kind == "random", ErrorCode::kConfig, "truth kind must be fixed or random");
  auto range = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const auto& r = j.at(key);
    require(r.is_array() && r.size() == 2, ErrorCode::kConfig,
            std::string("truth '") + key + "' must be [lo, hi]");
    lo = r[0].get<double>();
    hi = r[1].get<double>();
    require(lo <= hi, ErrorCode::kConfig, std::string("truth '") + key + "' has lo > hi");
  };
  range("mean", t.mean_lo, t.mean_hi);
  range("sigma", t.sigma_lo, t.sigma_hi);
  range("width", t.width_lo, t.width_hi);
  require(t.sigma_lo > 0.0 && t.width_lo > 0.0, ErrorCode::kConfig,
          "truth scales must be positive");
  return t;
}

void ExperimentConfig::validate() const {
  try {
    family.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::kConfig, what);
  };
  check(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  check(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  check(trials >= 1, "trials must be >= 1");
  check(n >= 2 && n <= 10000, "n must lie in [2, 10000]");
  check(family.dim <= 3, "dimension above the desk-scale ceiling (3)");
  check(family.k <= 3, "k above the desk-scale ceiling (3)");
  check(!cap || (*cap >= 1 && *cap <= 2000000), "cap must lie in [1, 2e6]");
  check(compression_sqrt_factor >= 0.0, "compression_sqrt_factor must be >= 0");
  check(format == "csv" || format == "json", "format must be csv or json");
  for (double a : bound_alphas) check(a > 0.0, "bound alphas must be positive");
  if (regime == Regime::kNoisy) {
    check(noise.scale >= 0.0, "noise scale must be >= 0");
    check(noise.dim == family.dim, "noise dimension differs from the family");
  }
  if (regime == Regime::kAdversarial) {
    check(budget.s <= 3, "s above the desk-scale ceiling (3)");
    check(budget.s < n, "s must be < n");
    check(budget.C >= 0.0, "C must be >= 0");
    if (strategy.target)
      check(strategy.target->size() == family.dim, "adversary target dimension");
  }
  if (truth.fixed) {
    auto f = density_from_json(*truth.fixed);
    check(f->dim() == family.dim, "truth dimension differs from the family");
  }
}

LearnerOptions ExperimentConfig::learner_options() const {
  LearnerOptions o;
  o.epsilon = epsilon;
  o.delta = delta;
  o.compression_size = compression_size;
  o.compression_sqrt_factor = compression_sqrt_factor;
  o.cap = cap;
  o.scheffe = scheffe;
  o.throw_on_guarantee_failure = false;
  return o;
}

json ExperimentConfig::to_json() const {
  json regime_j{{"kind", regime_name(regime)}};
  if (regime == Regime::kNoisy) regime_j["noise"] = noise.to_json();
  if (regime == Regime::kAdversarial) {
    regime_j["s"] = budget.s;
    regime_j["C"] = budget.C;
    regime_j["strategy"] = strategy.name();
    regime_j["target"] = optional_json(strategy.target);
  }
  return {{"family", family.to_json()},
          {"regime", regime_j},
          {"truth", truth.to_json()},
          {"n", n},
          {"epsilon", epsilon},
          {"delta", delta},
          {"trials", trials},
          {"seed", seed},
          {"cap", optional_json(cap)},
          {"learner",
           {{"compression_size", optional_json(compression_size)},
            {"compression_sqrt_factor", compression_sqrt_factor},
            {"scheffe_backend", backend_name(scheffe.backend)},
            {"mass_budget", scheffe.mass_budget}}},
          {"bound_alphas", bound_alphas},
          {"record_wall_time", record_wall_time},
          {"output", {{"path", optional_json(output)}, {"format", format}}}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  try {
    require(j.is_object(), ErrorCode::kConfig, "config must be a JSON object");
    for (const char* key : {"family", "n", "epsilon", "delta"})
      require(j.contains(key), ErrorCode::kConfig,
              std::string("config is missing '") + key + "'");
    ExperimentConfig c;
    c.family = FamilySpec::from_json(j.at("family"));
    if (j.contains("regime")) {
      const auto& r = j.at("regime");
      c.regime = regime_from_name(r.at("kind").get<std::string>());
      if (c.regime == Regime::kNoisy) {
        require(r.contains("noise"), ErrorCode::kConfig, "noisy regime needs 'noise'");
        json nj = r.at("noise");
        if (!nj.contains("dim")) nj["dim"] = c.family.dim;
        c.noise = NoiseModel::from_json(nj);
      } else {
        c.noise.dim = c.family.dim;
      }
      if (c.regime == Regime::kAdversarial) {
        require(r.contains("s") && r.contains("C"), ErrorCode::kConfig,
                "adversarial regime needs 's' and 'C'");
        c.budget.s = r.at("s").get<std::size_t>();
        c.budget.C = r.at("C").get<double>();
        c.strategy = AdversaryStrategy::from_name(
            r.value("strategy", std::string("mean_shift")));
        if (r.contains("target") && !r.at("target").is_null())
          c.strategy.target = r.at("target").get<std::vector<double>>();
      }
    }
    if (j.contains("truth")) c.truth = TruthSpec::from_json(j.at("truth"));
    c.n = j.at("n").get<std::size_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.delta = j.at("delta").get<double>();
    c.trials = j.value("trials", std::size_t{1});
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("cap"))
      c.cap = j.at("cap").is_null() ? std::nullopt
                                    : std::optional(j.at("cap").get<std::size_t>());
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      if (l.contains("compression_size") && !l.at("compression_size").is_null())
        c.compression_size = l.at("compression_size").get<std::size_t>();
      c.compression_sqrt_factor = l.value("compression_sqrt_factor", 0.0);
      c.scheffe.backend = backend_from_name(l.value("scheffe_backend", std::string("auto")));
      c.scheffe.mass_budget = l.value("mass_budget", c.scheffe.mass_budget);
    }
    c.bound_alphas = j.value("bound_alphas", std::vector<double>{});
    c.record_wall_time = j.value("record_wall_time", false);
    if (j.contains("output")) {
      const auto& o = j.at("output");
      if (o.contains("path") && !o.at("path").is_null())
        c.output = o.at("path").get<std::string>();
      c.format = o.value("format", c.format);
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    fail(ErrorCode::kConfig, e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), ErrorCode::kConfig, "cannot read config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// Records and reports

json TrialRecord::to_json() const {
  json j{{"trial", trial},
         {"seed", seed},
         {"tv_error", number_or_null(tv_error)},
         {"tv_std_error", tv_std_error},
         {"l2_error", number_or_null(l2_error)},
         {"candidate_count", candidate_count},
         {"truncated", truncated},
         {"clique_found", clique_found},
         {"wall_ms", wall_ms},
         {"conv_tv", optional_json(conv_tv)},
         {"l2_bound", optional_json(l2_bound)},
         {"tv_bound", optional_json(tv_bound)}};
  j["estimate"] = estimate ? *estimate : json(nullptr);
  j["truth"] = truth ? *truth : json(nullptr);
  j["audit"] = audit ? *audit : json(nullptr);
  return j;
}

TrialRecord TrialRecord::from_json(const json& j) {
  TrialRecord r;
  r.trial = j.at("trial").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.tv_error = number_or_nan(j.at("tv_error"));
  r.tv_std_error = j.value("tv_std_error", 0.0);
  r.l2_error = number_or_nan(j.at("l2_error"));
  r.candidate_count = j.at("candidate_count").get<std::size_t>();
  r.truncated = j.at("truncated").get<bool>();
  r.clique_found = j.at("clique_found").get<bool>();
  r.wall_ms = j.at("wall_ms").get<double>();
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<double>();
  };
  opt("conv_tv", r.conv_tv);
  opt("l2_bound", r.l2_bound);
  opt("tv_bound", r.tv_bound);
  auto opt_json = [&](const char* key, std::optional<json>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key);
  };
  opt_json("estimate", r.estimate);
  opt_json("truth", r.truth);
  opt_json("audit", r.audit);
  return r;
}

namespace {

MetricSummary summarize_values(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }),
          v.end());
  MetricSummary s;
  s.count = v.size();
  if (v.empty()) {
    s.median = s.p10 = s.p90 = kNaN;
    return s;
  }
  s.median = numeric::quantile(v, 0.5);
  s.p10 = numeric::quantile(v, 0.1);
  s.p90 = numeric::quantile(v, 0.9);
  return s;
}

json summary_json(const MetricSummary& s) {
  return {{"median", number_or_null(s.median)},
          {"p10", number_or_null(s.p10)},
          {"p90", number_or_null(s.p90)},
          {"count", s.count}};
}

MetricSummary summary_from_json(const json& j) {
  MetricSummary s;
  s.median = number_or_nan(j.at("median"));
  s.p10 = number_or_nan(j.at("p10"));
  s.p90 = number_or_nan(j.at("p90"));
  s.count = j.at("count").get<std::size_t>();
  return s;
}

}  // namespace

void summarize(Report& r) {
  std::vector<double> tv, l2;
  r.clique_failures = r.truncated_trials = r.l2_bound_held = r.l2_bound_checked = 0;
  for (const auto& row : r.rows) {
    tv.push_back(row.tv_error);
    l2.push_back(row.l2_error);
    r.clique_failures += !row.clique_found;
    r.truncated_trials += row.truncated;
    if (row.l2_bound && !std::isnan(row.l2_error)) {
      ++r.l2_bound_checked;
      r.l2_bound_held += row.l2_error <= *row.l2_bound;
    }
  }
  r.tv = summarize_values(tv);
  r.l2 = summarize_values(l2);
}

json Report::to_json() const {
  json rows_j = json::array();
  for (const auto& row : rows) rows_j.push_back(row.to_json());
  return {{"config", config},
          {"rows", rows_j},
          {"summary",
           {{"tv_error", summary_json(tv)},
            {"l2_error", summary_json(l2)},
            {"clique_failures", clique_failures},
            {"truncated_trials", truncated_trials},
            {"l2_bound_held", l2_bound_held},
            {"l2_bound_checked", l2_bound_checked}}}};
}

Report Report::from_json(const json& j) {
  try {
    Report r;
    r.config = j.at("config");
    for (const auto& row : j.at("rows")) r.rows.push_back(TrialRecord::from_json(row));
    const auto& s = j.at("summary");
    r.tv = summary_from_json(s.at("tv_error"));
    r.l2 = summary_from_json(s.at("l2_error"));
    r.clique_failures = s.at("clique_failures").get<std::size_t>();
    r.truncated_trials = s.at("truncated_trials").get<std::size_t>();
    r.l2_bound_held = s.at("l2_bound_held").get<std::size_t>();
    r.l2_bound_checked = s.at("l2_bound_checked").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed report: ") + e.what());
  }
}

bool operator==(const Report& a, const Report& b) {
  return a.to_json().dump() == b.to_json().dump();
}

// ---------------------------------------------------------------------------
// Trials

namespace {

std::vector<double> dirichlet_weights(std::size_t k, SeededRng& rng) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (auto& x : w) {
    x = -std::log1p(-rng.uniform());
    sum += x;
  }
  for (auto& x : w) x /= sum;
  return w;
}

DensityHandle draw_component(const ExperimentConfig& c, SeededRng& rng) {
  const auto& t = c.truth;
  const std::size_t d = c.family.dim;
  std::vector<double> loc(d);
  for (auto& v : loc) v = rng.uniform(t.mean_lo, t.mean_hi);
  if (is_uniform_family(c.family.family)) {
    const double T = c.family.min_width;
    std::vector<double> hi(d);
    for (std::size_t a = 0; a < d; ++a)
      hi[a] = loc[a] + rng.uniform(std::max(t.width_lo, T), std::max(t.width_hi, T));
    return make_box(loc, hi, T);
  }
  double lo = t.sigma_lo, up = t.sigma_hi;
  if (c.family.family != Family::kGaussian1D) {
    lo = std::max(lo, c.family.sigma0);
    up = std::max(up, c.family.sigma0);
  }
  return make_gaussian(loc, rng.uniform(lo, up));
}

double l1_half_side(const Density& f, const Density& g) {
  const Box b = joint_support(f, g);
  double side = 0.0;
  for (std::size_t a = 0; a < b.lower.size(); ++a)
    side = std::max(side, b.upper[a] - b.lower[a]);
  return side / 2.0;
}

std::vector<double> default_alphas() {
  std::vector<double> a;
  for (int i = 0; i <= 60; ++i) a.push_back(std::pow(10.0, -1.0 + i * 0.05));
  return a;
}

}  // namespace

DensityHandle draw_truth(const ExperimentConfig& c, SeededRng& rng) {
  if (c.truth.fixed) return density_from_json(*c.truth.fixed);
  if (!c.family.is_mixture()) return draw_component(c, rng);
  std::vector<DensityHandle> comps;
  for (std::size_t i = 0; i < c.family.k; ++i) comps.push_back(draw_component(c, rng));
  return make_mixture(dirichlet_weights(c.family.k, rng), comps);
}

TrialInput prepare_trial(const ExperimentConfig& c, std::size_t index) {
  const SeededRng root(derive_seed(c.seed, index));
  SeededRng truth_rng = root.substream(0);
  SeededRng sample_rng = root.substream(1);
  SeededRng perturb_rng = root.substream(2);
  TrialInput in;
  in.truth = draw_truth(c, truth_rng);
  in.clean = draw_samples(*in.truth, c.n, sample_rng);
  in.observed = in.clean;
  if (c.regime == Regime::kNoisy) {
    for (auto& v : in.observed.data()) v += c.noise.draw1(perturb_rng);
  } else if (c.regime == Regime::kAdversarial) {
    auto rec = corrupt_adversarial(in.clean, c.budget, c.strategy, nullptr, perturb_rng);
    in.observed = std::move(rec.samples);
    in.corrupted = std::move(rec.mask);
  }
  return in;
}

TrialRecord run_trial(const ExperimentConfig& c, std::size_t index) {
  const auto t0 = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.trial = index;
  rec.seed = derive_seed(c.seed, index);
  SeededRng learn_rng = SeededRng(rec.seed).substream(3);
  const std::uint64_t measure_seed = derive_seed(rec.seed, 4);

  const SchemeProfile scheme(c.family);
  const LearnerOptions opts = c.learner_options();
  TrialInput in = prepare_trial(c, index);
  const auto& truth = in.truth;

  LearnResult res;
  json audit;
  switch (c.regime) {
    case Regime::kClean:
      res = learn_clean(in.observed, scheme, opts, learn_rng);
      break;
    case Regime::kNoisy:
      res = learn_noisy(in.observed, scheme, c.noise, opts, learn_rng);
      break;
    case Regime::kAdversarial: {
      std::vector<std::size_t> mask;
      for (std::size_t i = 0; i < in.corrupted.size(); ++i)
        if (in.corrupted[i]) mask.push_back(i);
      audit["corrupted_rows"] = mask;
      res = learn_adversarial(in.observed, c.budget.s, scheme, c.budget.C, opts, learn_rng);
      break;
    }
  }
  json learner_audit = res.audit();
  for (auto& [k, v] : learner_audit.items()) audit[k] = v;
  rec.audit = audit;
  rec.candidate_count = res.candidate_count;
  rec.truncated = res.truncated;
  rec.clique_found = res.clique_found;
  rec.truth = density_to_json(*truth);

  if (!res.estimate) {
    // No clique: counted as a failed trial at the maximal TV error.
    rec.tv_error = 1.0;
    rec.l2_error = kNaN;
  } else {
    rec.estimate = density_to_json(*res.estimate);
    auto tv = distance(*res.estimate, *truth, Metric::kTV, DistanceMethod::kAuto,
                       kDefaultDistanceBudget, measure_seed);
    rec.tv_error = tv.value;
    rec.tv_std_error = tv.std_error;
    rec.l2_error = distance(*res.estimate, *truth, Metric::kL2, DistanceMethod::kAuto,
                            kDefaultDistanceBudget, measure_seed)
                       .value;

    const bool uniform = is_uniform_family(c.family.family);
    if (c.regime == Regime::kNoisy && !c.noise.degenerate() && c.family.dim <= 2 &&
        rec.l2_error > 0.0 && (uniform || c.family.dim == 1 ||
                               c.family.family == Family::kGaussianIso)) {
      auto fc = convolve_noise(res.estimate, c.noise);
      auto tc = convolve_noise(truth, c.noise);
      rec.conv_tv = distance(*fc, *tc, Metric::kTV, DistanceMethod::kAuto,
                             kDefaultDistanceBudget, measure_seed)
                        .value;
      CertificateFamily cf;
      if (uniform) {
        cf.kind = c.family.dim == 1 ? CertFamily::kKMixUniform1D : CertFamily::kKMixUniformD;
        cf.T = c.family.min_width;
        cf.k = c.family.k;
        cf.epsilon = rec.l2_error;
      } else {
        cf.kind = CertFamily::kGaussianIso;
        cf.sigma0 = c.family.sigma0;
      }
      cf.dim = c.family.dim;
      std::vector<LowFreqCertificate> certs;
      const auto alphas = c.bound_alphas.empty() ? default_alphas() : c.bound_alphas;
      for (double a : alphas) {
        if (cf.kind == CertFamily::kGaussianIso &&
            a <= gaussian_certificate_threshold(cf.sigma0, cf.dim))
          continue;
        auto cert = xi_certificate(cf, a);
        if (cert.xi < 1.0) certs.push_back(cert);
      }
      if (!certs.empty()) {
        // The learner's guarantee reads TV(f^ * G, f* * G) <= 12 eps.
        rec.l2_bound = l2_error_bound(*rec.conv_tv / 12.0, c.noise, certs);
        if (uniform)
{
          TVBound tb;
          tb.R = l1_half_side(*res.estimate, *truth);
          tb.dim = c.family.dim;
          rec.tv_bound = tv_from_l2(tb, *rec.l2_bound);
        }
      }
    }
  }
  if (c.record_wall_time)
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return rec;
}

Report run_experiment(const ExperimentConfig& c) {
  c.validate();
  Report r;
  r.config = c.to_json();
  for (std::size_t t = 0; t < c.trials; ++t) r.rows.push_back(run_trial(c, t));
  summarize(r);
  return r;
}

SweepField sweep_field_from_name(const std::string& s) {
  if (s == "n") return SweepField::kN;
  if (s == "s") return SweepField::kS;
  if (s == "sigma") return SweepField::kSigma;
  if (s == "C") return SweepField::kC;
  fail(ErrorCode::kConfig, "unknown sweep field: " + s);
}

std::vector<Report> sweep(const ExperimentConfig& c, SweepField field,
                          const std::vector<double>& values) {
  require(!values.empty(), ErrorCode::kConfig, "sweep needs at least one value");
  if (field == SweepField::kS || field == SweepField::kC)
    require(c.regime == Regime::kAdversarial, ErrorCode::kConfig,
            "s and C sweeps need the adversarial regime");
  if (field == SweepField::kSigma)
    require(c.regime == Regime::kNoisy, ErrorCode::kConfig,
            "sigma sweeps need the noisy regime");
  std::vector<Report> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig p = c;
    const double v = values[i];
    auto as_count = [&](const char* what) {
      require(v >= 0.0 && v == std::floor(v), ErrorCode::kConfig,
              std::string(what) + " values must be nonnegative integers");
      return std::size_t(v);
    };
    switch (field) {
      case SweepField::kN: p.n = as_count("n"); break;
      case SweepField::kS: p.budget.s = as_count("s"); break;
      case SweepField::kSigma: p.noise.scale = v; break;
      case SweepField::kC: p.budget.C = v; break;
    }
    p.seed = derive_seed(c.seed, i);
    out.push_back(run_experiment(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emission

ReportFormat report_format_from_name(const std::string& s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  fail(ErrorCode::kConfig, "format must be csv or json");
}

std::string report_to_csv(const Report& r) {
  std::ostringstream os;
  os << "trial,seed,tv_error,l2_error,candidate_count,truncated,clique_found,wall_ms\n";
  char buf[64];
  auto num = [&](double v) {
    if (std::isnan(v)) return std::string("nan");
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& row : r.rows)
    os << row.trial << ',' << row.seed << ',' << num(row.tv_error) << ','
       << num(row.l2_error) << ',' << row.candidate_count << ','
       << (row.truncated ? "true" : "false") << ','
       << (row.clique_found ? "true" : "false") << ',' << num(row.wall_ms) << '\n';
  return os.str();
}

std::string report_to_string(const Report& r, ReportFormat f) {
  return f == ReportFormat::kCsv ? report_to_csv(r) : r.to_json().dump(2) + "\n";
}

void emit_report(const Report& r, ReportFormat f, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(bool(out), ErrorCode::kIo, "cannot open " + path + " for writing");
  const std::string s = report_to_string(r, f);
  out.write(s.data(), std::streamsize(s.size()));
  out.close();
  require(!out.fail(), ErrorCode::kIo, "failed writing " + path);
}

// ---------------------------------------------------------------------------
// Certificates

LowFreqCertificate certify(const CertifyRequest& req) {
  auto cert = xi_certificate(req.family, req.alpha);
  if (req.p && req.q) {
    auto m = lowfreq_ratio(*req.p, *req.q, req.alpha, req.spectral);
    cert.measured_ratio = m.ratio;
    cert.verified = m.ratio <= cert.xi + req.tolerance;
  }
  return cert;
}

namespace {

std::vector<double> scalar_or_list(const json& j, const char* one, const char* many) {
  if (j.contains(many)) return j.at(many).get<std::vector<double>>();
  require(j.contains(one), ErrorCode::kConfig,
          std::string("request needs '") + one + "' or '" + many + "'");
  return {j.at(one).get<double>()};
}

}  // namespace

json certify_json(const json& request) {
  CertifyRequest req;
  std::vector<double> alphas;
  try {
    req.family = CertificateFamily::from_json(request.at("family"));
    alphas = scalar_or_list(request, "alpha", "alphas");
    if (request.contains("p") != request.contains("q"))
      fail(ErrorCode::kConfig, "certify needs both 'p' and 'q' or neither");
    if (request.contains("p")) {
      req.p = density_from_json(request.at("p"));
      req.q = density_from_json(request.at("q"));
    }
    req.tolerance = request.value("tolerance", req.tolerance);
    req.spectral.grid_size = request.value("grid_size", req.spectral.grid_size);
    req.spectral.nyquist_tolerance =
        request.value("nyquist_tolerance", req.spectral.nyquist_tolerance);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed certify request: ") + e.what());
  }
  json out = json::array();
  for (double a : alphas) {
    req.alpha = a;
    out.push_back(certify(req).to_json());
  }
  return {{"certificates", out}};
}

json waterfill_json(const json& request) {
  Envelope env;
  std::vector<double> eps;
  try {
    env = Envelope::from_json(request.at("envelope"));
    eps = scalar_or_list(request, "epsilon", "epsilons");
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed waterfill request: ") + e.what());
  }
  json results = json::array();
  for (double e : eps) {
    json r = waterfill(env, e).to_json();
    r["epsilon"] = e;
    results.push_back(r);
  }
  return {{"envelope", env.to_json()}, {"results", results}};
}

// ---------------------------------------------------------------------------
// Presets

namespace {

std::size_t ceil_log2_bits(std::size_t k, double eps) {
  return std::size_t(std::ceil(double(k) * std::log2(4.0 * double(k) / eps)));
}

}  // namespace

std::vector<Preset> presets() {
  std::vector<Preset> out;
  {
    Preset p{"gaussian1d_clean", {}, 2, 0};
    p.config.n = 5000;
    p.config.epsilon = 0.1;
    p.config.compression_sqrt_factor = 0.6;
    p.config.trials = 10;
    out.push_back(p);
  }
  {
    Preset p{"uniform_noisy", {}, 2, 0};
    p.config.family = {Family::kUniformBox, 1, 1, 1.0, 1.0};
    p.config.regime = Regime::kNoisy;
    p.config.noise = NoiseModel::gaussian(0.2);
    p.config.truth.fixed = density_to_json(*make_uniform1d(0, 1, 1.0));
    p.config.n = 4000;
    p.config.epsilon = 0.15;
    p.config.compression_size = 8;
    p.config.cap = 1200;
    p.config.trials = 10;
    out.push_back(p);
  }
  {
    const double eps = 0.3;
    Preset p{"kumm_noisy", {}, 4, ceil_log2_bits(2, eps)};
    p.config.family = {Family::kKMixUniform, 1, 2, 1.0, 1.0};
    p.config.regime = Regime::kNoisy;
    p.config.noise = NoiseModel::gaussian(0.1);
    p.config.truth.width_hi = 1.5;
    p.config.n = 3000;
    p.config.epsilon = eps;
    p.config.compression_size = 12;
    p.config.cap = 1500;
    p.config.trials = 5;
    out.push_back(p);
  }
  {
    const double eps = 0.3;
    Preset p{"kumm_adversarial", {}, 4, ceil_log2_bits(2, eps)};
    p.config.family = {Family::kKMixUniform, 1, 2, 1.0, 1.0};
    p.config.regime = Regime::kAdversarial;
    p.config.budget = {1, 5.0};
    p.config.strategy.kind = AdversaryKind::kDecoyCluster;
    p.config.truth.width_hi = 1.5;
    p.config.n = 3000;
    p.config.epsilon = eps;
    p.config.compression_size = 12;
    p.config.cap = 1500;
    p.config.trials = 5;
    out.push_back(p);
  }
  {
    const double eps = 0.3;
    Preset p{"kgmm_adversarial", {}, 4, ceil_log2_bits(2, eps)};
    p.config.family = {Family::kKMixGaussian, 1, 2, 0.5};
    p.config.regime = Regime::kAdversarial;
    p.config.budget = {1, 10.0};
    p.config.strategy.kind = AdversaryKind::kGreedyConfuser;
    p.config.n = 3000;
    p.config.epsilon = eps;
    p.config.compression_size = 12;
    p.config.cap = 1500;
    p.config.trials = 5;
    out.push_back(p);
  }
  {
    Preset p{"gaussian1d_adversarial", {}, 2, 0};
    p.config.family = {Family::kGaussian1D, 1, 1, 0.5};
    p.config.regime = Regime::kAdversarial;
    p.config.budget = {2, 50.0};
    p.config.strategy.kind = AdversaryKind::kDecoyCluster;
    p.config.truth.fixed = density_to_json(*make_gaussian1d(0, 1));
    p.config.n = 900;
    p.config.epsilon = 0.5;
    p.config.compression_size = 30;
    p.config.cap = 1200;
    p.config.trials = 10;
    out.push_back(p);
  }
  for (auto& p : out) p.config.noise.dim = p.config.family.dim;
  return out;
}

Preset preset(const std::string& name) {
  for (auto& p : presets())
    if (p.name == name) return p;
  fail(ErrorCode::kConfig, "unknown preset: " + name);
}

// ---------------------------------------------------------------------------
// Selftest

bool SelftestResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const SelftestCheck& c) { return c.passed; });
}

bool SelftestResult::failure_rate_exceeded() const {
  return adversarial_trials > 0 &&
         double(guarantee_failures) > delta * double(adversarial_trials);
}

json SelftestResult::to_json() const {
  json cj = json::array();
  for (const auto& c : checks)
    cj.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"checks", cj},
          {"adversarial_trials", adversarial_trials},
          {"guarantee_failures", guarantee_failures},
          {"delta", delta},
          {"failure_rate_exceeded", failure_rate_exceeded()}};
}

namespace {

template <class Fn>
void run_check(SelftestResult& out, const std::string& name, Fn&& fn) {
  SelftestCheck c{name, false, ""};
  try {
    c.detail = fn();
    c.passed = c.detail.empty();
  } catch (const std::exception& e) {
    c.detail = e.what();
  }
  out.checks.push_back(c);
}

ExperimentConfig tiny_clean() {
  ExperimentConfig c;
  c.n = 400;
  c.epsilon = 0.2;
  c.compression_size = 20;
  c.trials = 2;
  c.seed = 7;
  return c;
}

}  // namespace

SelftestResult selftest(const std::optional<ExperimentConfig>& config) {
  SelftestResult out;

  run_check(out, "grid coverage", []() -> std::string {
    auto g = build_grid(1.0, 0.25);
    if (g.size() != 5) return "expected 5 grid points";
    SeededRng rng(1);
    for (int i = 0; i < 10000; ++i)
      if (g.gap(rng.uniform(-1.0, 1.0)) > 0.25 + 1e-12) return "uncovered point";
    return "";
  });

  run_check(out, "pigeonhole", []() -> std::string {
    for (std::size_t s = 1; s <= 3; ++s) {
      const std::size_t n = 2 * (2 * s + 1) + 1;
      auto part = partition_groups(n, 1, s);
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        if (std::size_t(std::popcount(m)) > s) continue;
        std::size_t clean = 0;
        for (auto [lo, hi] : part.groups) {
          bool dirty = false;
          for (std::size_t i = lo; i < hi; ++i) dirty |= (m >> i) & 1;
          clean += !dirty;
        }
        if (clean < s + 1) return "partition with too few clean groups";
      }
    }
    return "";
  });

  run_check(out, "clique soundness", []() -> std::string {
    const double eps = 0.3, ep = eps / 6, edp = eps / 24;
    auto oracle = [](const Density& f, const Density& g) {
      auto& a = dynamic_cast<const IsoGaussian&>(f);
      auto& b = dynamic_cast<const IsoGaussian&>(g);
      return 2.0 * tv_gaussian1d_closed(a.mean()[0], a.sigma(), b.mean()[0], b.sigma());
    };
    SeededRng rng(2);
    for (int inst = 0; inst < 20; ++inst) {
      const std::size_t s = 1 + rng.below(3);
      auto ref = make_gaussian1d(0, 1);
      std::vector<DensityHandle> h;
      for (std::size_t i = 0; i < 2 * s + 1; ++i) {
        DensityHandle g;
        if (i % 2 == 0) {
          do g = make_gaussian1d(rng.uniform(-0.05, 0.05), 1.0);
          while (oracle(*g, *ref) > ep);
        } else {
          g = make_gaussian1d(rng.uniform(-1.0, 1.0), 1.0);
        }
        h.push_back(g);
      }
      for (auto i : find_clique(h, 2 * ep + 8 * edp, s + 1, oracle))
        if (oracle(*h[i], *ref) > 3 * ep + 12 * edp) return "clique member too far";
    }
    return "";
  });

  run_check(out, "corruption budget", []() -> std::string {
    SeededRng rng(3);
    auto x = draw_samples(*make_gaussian1d(0, 1), 50, rng);
    for (int k = 0; k < 3; ++k) {
      AdversaryStrategy st;
      st.kind = AdversaryKind(k);
      auto rec = corrupt_adversarial(x, {3, 2.0}, st, nullptr, rng);
      std::size_t changed = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(rec.samples[i][0] - x[i][0]) > 2.0 + 1e-12) return "budget exceeded";
        changed += rec.mask[i];
      }
      if (changed != 3) return "wrong number of corrupted rows";
    }
    return "";
  });

  run_check(out, "zeta limits", []() -> std::string {
    double prev = 0.0;
    for (double h = 0.0; h < 50.0; h += 0.5) {
      const double z = zeta(h);
      if (z < prev || z >= 1.0) return "zeta not monotone in [0, 1)";
      prev = z;
    }
    if (std::abs(zeta(1e6) - 1.0) > 1e-5) return "zeta(1e6) not near 1";
    return "";
  });

  run_check(out, "water-filling equality case", []() -> std::string {
    auto r = waterfill(Envelope{EnvelopeKind::kConstantOnBox, 1.0, 1.0}, 0.5);
    return std::abs(r.l1_bound - 0.5) <= 1e-9 ? "" : "l1 bound differs from eps sqrt(V)";
  });

  run_check(out, "report determinism", []() -> std::string {
    auto c = tiny_clean();
    auto a = report_to_csv(run_experiment(c)), b = report_to_csv(run_experiment(c));
    return a == b ? "" : "identical configs gave different reports";
  });

  run_check(out, "clean equals adversarial s=0", []() -> std::string {
    auto c = tiny_clean();
    auto adv = c;
    adv.regime = Regime::kAdversarial;
    adv.budget = {0, 3.0};
    return report_to_csv(run_experiment(c)) == report_to_csv(run_experiment(adv))
               ? ""
               : "reports differ";
  });

  ExperimentConfig adv = config ? *config : preset("gaussian1d_adversarial").config;
  require(adv.regime == Regime::kAdversarial, ErrorCode::kConfig,
          "selftest config must use the adversarial regime");
  auto report = run_experiment(adv);
  out.adversarial_trials = report.rows.size();
  out.guarantee_failures = report.clique_failures;
  out.delta = adv.delta;
  return out;
}

}  // namespace scomp
