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

#include "scomp/scomp.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "scomp/error.hpp"
#include "scomp/harness.hpp"

struct scomp_config {
  scomp::ExperimentConfig config;
};

struct scomp_report {
  scomp::Report report;
};

namespace {

thread_local std::string g_last_error;

scomp_status to_status(scomp::ErrorCode code) {
  switch (code) {
    case scomp::ErrorCode::kInvalidArgument: return SCOMP_INVALID_ARGUMENT;
    case scomp::ErrorCode::kDimensionMismatch: return SCOMP_DIMENSION_MISMATCH;
    case scomp::ErrorCode::kUnsupported: return SCOMP_UNSUPPORTED;
    case scomp::ErrorCode::kConfig: return SCOMP_CONFIG_ERROR;
    case scomp::ErrorCode::kGuaranteeFailure: return SCOMP_GUARANTEE_FAILURE;
    case scomp::ErrorCode::kIo: return SCOMP_IO_ERROR;
    case scomp::ErrorCode::kInfeasible: return SCOMP_INFEASIBLE;
  }
  return SCOMP_INTERNAL_ERROR;
}

template <class Fn>
scomp_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SCOMP_OK;
  } catch (const scomp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return SCOMP_CONFIG_ERROR;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SCOMP_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SCOMP_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown exception";
    return SCOMP_INTERNAL_ERROR;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) scomp::fail(scomp::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}


template <class Fn>
scomp_status json_call(const char* request_json, char** out_json, Fn&& fn) {
  return guarded([&] {
    need(request_json, "request_json");
    need(out_json, "out_json");
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(request_json);
    } catch (const nlohmann::json::exception& e) {
      scomp::fail(scomp::ErrorCode::kConfig, std::string("request is not valid JSON: ") + e.what());
    }
    *out_json = dup_string(fn(req).dump(2));
  });
}

}  // namespace

extern "C" {

SCOMP_API const char* scomp_version(void) { return "0.1.0"; }

SCOMP_API const char* scomp_status_name(scomp_status status) {
  switch (status) {
    case SCOMP_OK: return "ok";
    case SCOMP_INVALID_ARGUMENT: return "invalid argument";
    case SCOMP_DIMENSION_MISMATCH: return "dimension mismatch";
    case SCOMP_UNSUPPORTED: return "unsupported";
    case SCOMP_CONFIG_ERROR: return "config error";
    case SCOMP_GUARANTEE_FAILURE: return "guarantee failure";
    case SCOMP_IO_ERROR: return "I/O error";
    case SCOMP_INFEASIBLE: return "infeasible";
    case SCOMP_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

SCOMP_API const char* scomp_last_error(void) { return g_last_error.c_str(); }

SCOMP_API void scomp_string_free(char* s) { std::free(s); }

SCOMP_API scomp_status scomp_config_load(const char* path, scomp_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new scomp_config{scomp::load_config(path)};
  });
}

SCOMP_API scomp_status scomp_config_parse(const char* json_text, scomp_config** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      scomp::fail(scomp::ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
    }
    *out = new scomp_config{scomp::ExperimentConfig::from_json(j)};
  });
}

SCOMP_API scomp_status scomp_config_preset(const char* name, scomp_config** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = new scomp_config{scomp::preset(name).config};
  });
}

SCOMP_API scomp_status scomp_preset_list(char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    auto list = nlohmann::json::array();
    for (const auto& p : scomp::presets())
      list.push_back({{"name", p.name}, {"tau", p.declared_tau}, {"t", p.declared_t}});
    *out_json = dup_string(list.dump(2));
  });
}

SCOMP_API scomp_status scomp_config_set_seed(scomp_config* cfg, uint64_t seed) {
  return guarded([&] {
    need(cfg, "cfg");
    cfg->config.seed = seed;
  });
}

SCOMP_API scomp_status scomp_config_set_trials(scomp_config* cfg, size_t trials) {
  return guarded([&] {
    need(cfg, "cfg");
    auto c = cfg->config;
    c.trials = trials;
    c.validate();
    cfg->config = c;
  });
}

SCOMP_API scomp_status scomp_config_set_cap(scomp_config* cfg, size_t cap) {
  return guarded([&] {
    need(cfg, "cfg");
    auto c = cfg->config;
    c.cap = cap;
    c.validate();
    cfg->config = c;
  });
}

SCOMP_API scomp_status scomp_config_set_output(scomp_config* cfg, const char* path,
                                               const char* format) {
  return guarded([&] {
    need(cfg, "cfg");
    auto c = cfg->config;
    if (path) c.output = std::string(path);
    if (format) c.format = format;
    c.validate();
    cfg->config = c;
  });
}

SCOMP_API scomp_status scomp_config_get_output(const scomp_config* cfg, char** path,
                                               char** format) {
  return guarded([&] {
    need(cfg, "cfg");
    need(path, "path");
    need(format, "format");
    *format = dup_string(cfg->config.format);
    *path = cfg->config.output ? dup_string(*cfg->config.output) : nullptr;
  });
}

SCOMP_API scomp_status scomp_config_to_json(const scomp_config* cfg, char** out_json) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out_json, "out_json");
    *out_json = dup_string(cfg->config.to_json().dump(2));
  });
}

SCOMP_API void scomp_config_free(scomp_config* cfg) { delete cfg; }

SCOMP_API scomp_status scomp_simulate(const scomp_config* cfg, scomp_report** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new scomp_report{scomp::run_experiment(cfg->config)};
  });
}

SCOMP_API scomp_status scomp_sweep(const scomp_config* cfg, const char* field,
                                   const double* values, size_t count,
                                   scomp_report** out_reports) {
  return guarded([&] {
    need(cfg, "cfg");
    need(field, "field");
    need(out_reports, "out_reports");
    if (count > 0) need(values, "values");
    auto reports = scomp::sweep(cfg->config, scomp::sweep_field_from_name(field),
                                std::vector<double>(values, values + count));
    for (std::size_t i = 0; i < reports.size(); ++i)
      out_reports[i] = new scomp_report{std::move(reports[i])};
  });
}

SCOMP_API scomp_status scomp_report_summary(const scomp_report* report, scomp_summary* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    const auto& r = report->report;
    *out = scomp_summary{r.rows.size(), r.tv.median, r.tv.p10, r.tv.p90,
                         r.l2.median,   r.l2.p10,    r.l2.p90,  r.clique_failures,
                         r.truncated_trials, r.l2_bound_held, r.l2_bound_checked};
  });
}

SCOMP_API scomp_status scomp_report_render(const scomp_report* report, const char* format,
                                           char** out_text) {
  return guarded([&] {
    need(report, "report");
    need(format, "format");
    need(out_text, "out_text");
    *out_text = dup_string(
        scomp::report_to_string(report->report, scomp::report_format_from_name(format)));
  });
}

SCOMP_API scomp_status scomp_report_write(const scomp_report* report, const char* format,
                                          const char* path) {
  return guarded([&] {
    need(report, "report");
    need(format, "format");
    need(path, "path");
    scomp::emit_report(report->report, scomp::report_format_from_name(format), path);
  });
}

SCOMP_API void scomp_report_free(scomp_report* report) { delete report; }


SCOMP_API scomp_status scomp_certify(const char* request_json, char** out_json) {
  return json_call(request_json, out_json, scomp::certify_json);
}

SCOMP_API scomp_status scomp_waterfill(const char* request_json, char** out_json) {
  return json_call(request_json, out_json, scomp::waterfill_json);
}

SCOMP_API scomp_status scomp_selftest(const scomp_config* cfg, char** out_json,
                                      int* all_passed, int* failure_rate_exceeded) {
  return guarded([&] {
    need(out_json, "out_json");
    auto r = cfg ? scomp::selftest(cfg->config) : scomp::selftest();
    *out_json = dup_string(r.to_json().dump(2));
    if (all_passed) *all_passed = r.all_passed();
    if (failure_rate_exceeded) *failure_rate_exceeded = r.failure_rate_exceeded();
  });
}

}  // extern "C"
