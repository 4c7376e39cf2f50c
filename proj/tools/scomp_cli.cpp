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

// scomp command-line front end. Links only the C interface.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scomp/scomp.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRateExceeded = 3;

struct CallFailed {
  scomp_status status;
};

void check(scomp_status s) {
  if (s != SCOMP_OK) throw CallFailed{s};
}

struct StringDeleter {
  void operator()(char* p) const { scomp_string_free(p); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct ConfigDeleter {
  void operator()(scomp_config* p) const { scomp_config_free(p); }
};
using OwnedConfig = std::unique_ptr<scomp_config, ConfigDeleter>;

struct ReportDeleter {
  void operator()(scomp_report* p) const { scomp_report_free(p); }
};
using OwnedReport = std::unique_ptr<scomp_report, ReportDeleter>;

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> cap;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Experiment config (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "Built-in preset name");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--trials", c.trials, "Number of trials")->check(CLI::PositiveNumber);
  cmd->add_option("--cap", c.cap, "Candidate cap")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output path (stdout when omitted)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

OwnedConfig resolve_config(const Common& c) {
  scomp_config* raw = nullptr;
  if (!c.config_path.empty() && !c.preset.empty()) {
    std::cerr << "error: --config and --preset are exclusive\n";
    throw CallFailed{SCOMP_CONFIG_ERROR};
  }
  if (!c.config_path.empty()) {
    check(scomp_config_load(c.config_path.c_str(), &raw));
  } else if (!c.preset.empty()) {
    check(scomp_config_preset(c.preset.c_str(), &raw));
  } else {
    std::cerr << "error: one of --config or --preset is required\n";
    throw CallFailed{SCOMP_CONFIG_ERROR};
  }
  OwnedConfig cfg(raw);
  if (c.seed) check(scomp_config_set_seed(cfg.get(), *c.seed));
  if (c.trials) check(scomp_config_set_trials(cfg.get(), *c.trials));
  if (c.cap) check(scomp_config_set_cap(cfg.get(), *c.cap));
  check(scomp_config_set_output(cfg.get(), c.out.empty() ? nullptr : c.out.c_str(),
                                c.format.empty() ? nullptr : c.format.c_str()));
  return cfg;
}

std::pair<std::optional<std::string>, std::string> output_of(const scomp_config* cfg) {
  char* path = nullptr;
  char* format = nullptr;
  check(scomp_config_get_output(cfg, &path, &format));
  OwnedString p(path), f(format);
  return {path ? std::optional<std::string>(path) : std::nullopt, std::string(format)};
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    throw CallFailed{SCOMP_IO_ERROR};
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    throw CallFailed{SCOMP_CONFIG_ERROR};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render(const scomp_report* r, const std::string& format) {
  char* text = nullptr;
  check(scomp_report_render(r, format.c_str(), &text));
  OwnedString owned(text);
  return text;
}

void print_summary(const scomp_report* r) {
  scomp_summary s{};
  check(scomp_report_summary(r, &s));
  std::fprintf(stderr,
               "trials=%zu tv median=%.4g p10=%.4g p90=%.4g  l2 median=%.4g  "
               "clique failures=%zu truncated=%zu",
               s.trials, s.tv_median, s.tv_p10, s.tv_p90, s.l2_median, s.clique_failures,
               s.truncated_trials);
  if (s.l2_bound_checked > 0)
    std::fprintf(stderr, "  l2 bound held %zu/%zu", s.l2_bound_held, s.l2_bound_checked);
  std::fputc('\n', stderr);
}

int cmd_simulate(const Common& c) {
  auto cfg = resolve_config(c);
  scomp_report* raw = nullptr;
  check(scomp_simulate(cfg.get(), &raw));
  OwnedReport report(raw);
  auto [path, format] = output_of(cfg.get());
  if (path) {
    check(scomp_report_write(report.get(), format.c_str(), path->c_str()));
  } else {
    std::cout << render(report.get(), format);
  }
  print_summary(report.get());
  return kExitOk;
}

int cmd_sweep(const Common& c, const std::string& field, const std::vector<double>& values) {
  auto cfg = resolve_config(c);
  std::vector<scomp_report*> raw(values.size(), nullptr);
  check(scomp_sweep(cfg.get(), field.c_str(), values.data(), values.size(), raw.data()));
  std::vector<OwnedReport> reports;
  for (auto* r : raw) reports.emplace_back(r);
  auto [path, format] = output_of(cfg.get());

  if (format == "json") {
    std::string text = "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::string body = render(reports[i].get(), "json");
      body.pop_back();  // trailing newline
      text += body + (i + 1 < reports.size() ? ",\n" : "\n");
    }
    text += "]\n";
    write_text(text, path.value_or(""));
  } else if (path) {
    // One CSV per sweep point: out.csv -> out_0.csv, out_1.csv, ...
    const auto dot = path->find_last_of('.');
    const bool has_ext = dot != std::string::npos && path->find('/', dot) == std::string::npos;
    const std::string stem = has_ext ? path->substr(0, dot) : *path;
    const std::string ext = has_ext ? path->substr(dot) : "";
    for (std::size_t i = 0; i < reports.size(); ++i)
      check(scomp_report_write(reports[i].get(), "csv",
                               (stem + "_" + std::to_string(i) + ext).c_str()));
  } else {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i) std::cout << '\n';
      std::cout << "# " << field << "=" << values[i] << '\n' << render(reports[i].get(), "csv");
    }
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::fprintf(stderr, "%s=%g: ", field.c_str(), values[i]);
    print_summary(reports[i].get());
  }
  return kExitOk;
}

int cmd_json_tool(scomp_status (*fn)(const char*, char**), const Common& c) {
  if (c.config_path.empty()) {
    std::cerr << "error: --config is required\n";
    return kExitConfig;
  }
  char* out = nullptr;
  check(fn(slurp(c.config_path).c_str(), &out));
  OwnedString owned(out);
  write_text(std::string(out) + "\n", c.out);
  return kExitOk;
}

int cmd_selftest(Common c) {
  if (c.config_path.empty() && c.preset.empty()) c.preset = "gaussian1d_adversarial";
  auto cfg = resolve_config(c);
  char* out = nullptr;
  int passed = 0, exceeded = 0;
  check(scomp_selftest(cfg.get(), &out, &passed, &exceeded));
  OwnedString owned(out);
  write_text(std::string(out) + "\n", c.out);
  if (exceeded) {
    std::cerr << "selftest: guarantee-failure rate exceeds delta\n";
    return kExitRateExceeded;
  }
  if (!passed) {
    std::cerr << "selftest: invariant checks failed\n";
    return kExitFailure;
  }
  std::cerr << "selftest: all checks passed\n";
  return kExitOk;
}

int cmd_presets() {
  char* out = nullptr;
  check(scomp_preset_list(&out));
  OwnedString owned(out);
  std::cout << out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-compression density learning simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", scomp_version());

  Common sim, swp, cert, wf, st;
  auto* simulate = app.add_subcommand("simulate", "Run an experiment");
  add_common(simulate, sim);

  auto* sweep = app.add_subcommand("sweep", "Run an experiment over a list of values");
  add_common(sweep, swp);
  std::string field;
  std::vector<double> values;
  sweep->add_option("--vary", field, "n, s, sigma or C")
      ->required()
      ->check(CLI::IsMember({"n", "s", "sigma", "C"}));
  sweep->add_option("--values", values, "Values for the varied field")
      ->required()
      ->delimiter(',');

  auto* certify = app.add_subcommand("certify", "Evaluate low-frequency certificates");
  certify->add_option("--config", cert.config_path, "Certify request (JSON)")
      ->check(CLI::ExistingFile);
  certify->add_option("--out", cert.out, "Output path");

  auto* waterfill = app.add_subcommand("waterfill", "Water-filling L1 bounds");
  waterfill->add_option("--config", wf.config_path, "Waterfill request (JSON)")
      ->check(CLI::ExistingFile);
  waterfill->add_option("--out", wf.out, "Output path");

  auto* selftest = app.add_subcommand("selftest", "Run the invariant suites");
  add_common(selftest, st);

  auto* list = app.add_subcommand("presets", "List built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*sweep) return cmd_sweep(swp, field, values);
    if (*certify) return cmd_json_tool(scomp_certify, cert);
    if (*waterfill) return cmd_json_tool(scomp_waterfill, wf);
    if (*selftest) return cmd_selftest(st);
    if (*list) return cmd_presets();
  } catch (const CallFailed& f) {
    const char* msg = scomp_last_error();
    if (msg && *msg) std::cerr << "error: " << msg << "\n";
    return f.status == SCOMP_CONFIG_ERROR ? kExitConfig : kExitFailure;
  }
  return kExitFailure;
}
