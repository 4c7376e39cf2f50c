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

/* C interface to the scomp library. All objects are opaque; every call that
 * can fail returns an scomp_status and leaves a message retrievable through
 * scomp_last_error() on the calling thread. Strings returned through char**
 * out-parameters are owned by the caller and released with scomp_string_free.
 */
#ifndef SCOMP_H
#define SCOMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SCOMP_API __declspec(dllexport)
#else
#define SCOMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum scomp_status {
  SCOMP_OK = 0,
  SCOMP_INVALID_ARGUMENT = 1,
  SCOMP_DIMENSION_MISMATCH = 2,
  SCOMP_UNSUPPORTED = 3,
  SCOMP_CONFIG_ERROR = 4,
  SCOMP_GUARANTEE_FAILURE = 5,
  SCOMP_IO_ERROR = 6,
  SCOMP_INFEASIBLE = 7,
  SCOMP_INTERNAL_ERROR = 99
} scomp_status;

typedef struct scomp_config scomp_config;
typedef struct scomp_report scomp_report;

typedef struct scomp_summary {
  size_t trials;
  double tv_median, tv_p10, tv_p90;
  double l2_median, l2_p10, l2_p90; /* NaN when no trial produced an estimate */
  size_t clique_failures;
  size_t truncated_trials;
  size_t l2_bound_held;
  size_t l2_bound_checked;
} scomp_summary;

SCOMP_API const char* scomp_version(void);
SCOMP_API const char* scomp_status_name(scomp_status status);
/* Message of the last failed call on this thread; "" if none. */
SCOMP_API const char* scomp_last_error(void);
SCOMP_API void scomp_string_free(char* s);

/* Configurations */
SCOMP_API scomp_status scomp_config_load(const char* path, scomp_config** out);
SCOMP_API scomp_status scomp_config_parse(const char* json_text, scomp_config** out);
SCOMP_API scomp_status scomp_config_preset(const char* name, scomp_config** out);
/* JSON array of {"name", "tau", "t"} for the built-in presets. */
SCOMP_API scomp_status scomp_preset_list(char** out_json);
SCOMP_API scomp_status scomp_config_set_seed(scomp_config* cfg, uint64_t seed);
SCOMP_API scomp_status scomp_config_set_trials(scomp_config* cfg, size_t trials);
SCOMP_API scomp_status scomp_config_set_cap(scomp_config* cfg, size_t cap);
SCOMP_API scomp_status scomp_config_set_output(scomp_config* cfg, const char* path,
                                               const char* format);
/* *path is NULL when the config names no output file. */
SCOMP_API scomp_status scomp_config_get_output(const scomp_config* cfg, char** path,
                                               char** format);
SCOMP_API scomp_status scomp_config_to_json(const scomp_config* cfg, char** out_json);
SCOMP_API void scomp_config_free(scomp_config* cfg);

/* Experiments */
SCOMP_API scomp_status scomp_simulate(const scomp_config* cfg, scomp_report** out);
/* field is one of "n", "s", "sigma", "C"; out_reports has room for count
 * handles, all of which are set on success. */
SCOMP_API scomp_status scomp_sweep(const scomp_config* cfg, const char* field,
                                   const double* values, size_t count,
                                   scomp_report** out_reports);
SCOMP_API scomp_status scomp_report_summary(const scomp_report* report, scomp_summary* out);
/* format is "csv" or "json". */
SCOMP_API scomp_status scomp_report_render(const scomp_report* report, const char* format,
                                           char** out_text);
SCOMP_API scomp_status scomp_report_write(const scomp_report* report, const char* format,
                                          const char* path);
SCOMP_API void scomp_report_free(scomp_report* report);

/* Spectral tools, JSON in and out. */
SCOMP_API scomp_status scomp_certify(const char* request_json, char** out_json);
SCOMP_API scomp_status scomp_waterfill(const char* request_json, char** out_json);

/* Invariant checks plus an adversarial run (the built-in preset when cfg is
 * NULL). all_passed and failure_rate_exceeded may be NULL. */
SCOMP_API scomp_status scomp_selftest(const scomp_config* cfg, char** out_json,
                                      int* all_passed, int* failure_rate_exceeded);

#ifdef __cplusplus
}
#endif

#endif /* SCOMP_H */
