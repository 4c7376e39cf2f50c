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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scomp/compression.hpp"
#include "scomp/densities.hpp"
#include "scomp/robust.hpp"
#include "scomp/select.hpp"
#include "scomp/spectral.hpp"

namespace scomp {

enum class Regime { kClean, kNoisy, kAdversarial };

// Random truths draw means (or box lower corners) from `mean`, Gaussian scales
// from `sigma` (floored at sigma0) and box widths from `width` (floored at
// T). Mixture weights are Dirichlet(1).
struct TruthSpec {
  std::optional<nlohmann::json> fixed;  // density JSON
  double mean_lo = -5.0, mean_hi = 5.0;
  double sigma_lo = 0.5, sigma_hi = 2.0;
  double width_lo = 1.0, width_hi = 2.0;

  nlohmann::json to_json() const;
  static TruthSpec from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
  FamilySpec family;
  Regime regime = Regime::kClean;
  NoiseModel noise;
  AdversaryBudget budget;
  AdversaryStrategy strategy;
  TruthSpec truth;
  std::size_t n = 1000;
  double epsilon = 0.1;
  double delta = 0.1;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::optional<std::size_t> cap = 2000000;
  // Learner knobs (see LearnerOptions).
  std::optional<std::size_t> compression_size;
  double compression_sqrt_factor = 0.0;
  ScheffeOptions scheffe;
  // Alphas scanned for the spectral L2 bound in the noisy regime; empty
  // picks a default log grid.
  std::vector<double> bound_alphas;
  // Wall time is left at 0 unless enabled, so reports stay byte-stable.
  bool record_wall_time = false;
  std::optional<std::string> output;
  std::string format = "csv";

  void validate() const;
  LearnerOptions learner_options() const;
  nlohmann::json to_json() const;
  // Throws kConfig on any schema or range problem.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

ExperimentConfig load_config(const std::string& path);

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double tv_error = 0.0;
  double tv_std_error = 0.0;  // nonzero only for Monte Carlo distances
  double l2_error = 0.0;      // NaN when no estimate was produced
  std::size_t candidate_count = 0;
  bool truncated = false;
  bool clique_found = true;
  double wall_ms = 0.0;
  // Noisy regime: TV(f^ * G, f* * G), the spectral L2 bound and, for bounded
  // supports, the TV bound derived from it.
  std::optional<double> conv_tv;
  std::optional<double> l2_bound;
  std::optional<double> tv_bound;
  std::optional<nlohmann::json> estimate;
  std::optional<nlohmann::json> truth;
  std::optional<nlohmann::json> audit;

  nlohmann::json to_json() const;
  static TrialRecord from_json(const nlohmann::json& j);
};

struct MetricSummary {
  double median = 0.0, p10 = 0.0, p90 = 0.0;
  std::size_t count = 0;
};

struct Report {
  nlohmann::json config;
  std::vector<TrialRecord> rows;
  MetricSummary tv;
  MetricSummary l2;
  std::size_t clique_failures = 0;
  std::size_t truncated_trials = 0;
  // Trials with l2_error <= l2_bound, out of those with a bound.
  std::size_t l2_bound_held = 0;
  std::size_t l2_bound_checked = 0;

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
  friend bool operator==(const Report& a, const Report& b);
};

// Summary of a set of rows (recomputed from rows).
void summarize(Report& report);

// Draws the truth for one trial.
DensityHandle draw_truth(const ExperimentConfig& config, SeededRng& rng);

// One seeded trial; trial seeds are derive_seed(config.seed, index).
// Truth and samples of one trial exactly as run_trial hands them to the
// learner; `corrupted` is empty outside the adversarial regime.
struct TrialInput {
  DensityHandle truth;
  PointSet clean;
  PointSet observed;
  std::vector<bool> corrupted;
};
TrialInput prepare_trial(const ExperimentConfig& config, std::size_t index);

TrialRecord run_trial(const ExperimentConfig& config, std::size_t index);

Report run_experiment(const ExperimentConfig& config);

enum class SweepField { kN, kS, kSigma, kC };
SweepField sweep_field_from_name(const std::string& name);

// One report per value; point i runs with seed derive_seed(config.seed, i).
std::vector<Report> sweep(const ExperimentConfig& config, SweepField field,
                          const std::vector<double>& values);

enum class ReportFormat { kCsv, kJson };
ReportFormat report_format_from_name(const std::string& name);

// CSV header: trial,seed,tv_error,l2_error,candidate_count,truncated,
// clique_found,wall_ms.
std::string report_to_csv(const Report& report);
std::string report_to_string(const Report& report, ReportFormat format);
// Throws kIo when the file cannot be written.
void emit_report(const Report& report, ReportFormat format,
                 const std::string& path);

// Certificate for `family` at `alpha`; with a pair, also measures the
// high-band ratio and marks the certificate verified when it is within
// `tolerance`.
struct CertifyRequest {
  CertificateFamily family;
  double alpha = 0.0;
  DensityHandle p, q;
  double tolerance = 0.02;
  LowFreqOptions spectral;
};
LowFreqCertificate certify(const CertifyRequest& request);

// JSON front ends for the certify and waterfill subcommands.
//   certify:   {"family": {...}, "alpha": a | "alphas": [...], "p": density,
//               "q": density, "tolerance": t, "grid_size": n, "nyquist_tolerance": x}
//              -> {"certificates": [...]}
//   waterfill: {"envelope": {...}, "epsilon": e | "epsilons": [...]}
//              -> {"envelope": {...}, "results": [{"epsilon": e, ...}]}
nlohmann::json certify_json(const nlohmann::json& request);
nlohmann::json waterfill_json(const nlohmann::json& request);

// Preset experiments together with the (tau, t) they declare.
struct Preset {
  std::string name;
  ExperimentConfig config;
  std::size_t declared_tau = 0;
  std::size_t declared_t = 0;
};
std::vector<Preset> presets();
Preset preset(const std::string& name);

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestResult {
  std::vector<SelftestCheck> checks;
  std::size_t adversarial_trials = 0;
  std::size_t guarantee_failures = 0;
  double delta = 0.1;

  bool all_passed() const;
  bool failure_rate_exceeded() const;
  nlohmann::json to_json() const;
};

// Fast invariant suites plus a small adversarial run whose clique-failure
// rate is compared to delta. `config`, when given, replaces the default
// adversarial run.
SelftestResult selftest(const std::optional<ExperimentConfig>& config = std::nullopt);

}  // namespace scomp
