// Copyright 2026 The timeaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/*
 * timeaudit C API.
 *
 * Every function returns a ta_status. On failure ta_last_error() describes
 * the problem; the message is thread-local and valid until the next call on
 * the same thread. Strings returned through char** out-parameters are owned
 * by the caller and must be released with ta_string_free().
 *
 * Documents (options, policies, reports, tables) are UTF-8 JSON text; their
 * layouts are described in the README.
 */
#ifndef TIMEAUDIT_H
#define TIMEAUDIT_H

#include <stddef.h>

#if defined(TIMEAUDIT_BUILDING_LIBRARY)
#define TIMEAUDIT_API __attribute__((visibility("default")))
#else
#define TIMEAUDIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ta_status {
  TA_OK = 0,
  TA_ERR_INVALID_ARGUMENT = 1,
  TA_ERR_IO = 2,
  TA_ERR_PARSE = 3,
  TA_ERR_CYCLE = 4,
  TA_ERR_MISSING_SNAPSHOT = 5,
  TA_ERR_POLICY = 6,
  TA_ERR_SCHEMA = 7,
  TA_ERR_SOURCES = 8,
  TA_ERR_INTERNAL = 99
} ta_status;

/* A mutable, ordered collection of commit records. */
typedef struct ta_dataset ta_dataset;

TIMEAUDIT_API const char* ta_version(void);
TIMEAUDIT_API const char* ta_last_error(void);
TIMEAUDIT_API const char* ta_status_name(ta_status status);
TIMEAUDIT_API void ta_string_free(char* s);

TIMEAUDIT_API ta_status ta_dataset_create(ta_dataset** out);
TIMEAUDIT_API void ta_dataset_free(ta_dataset* ds);

/*
 * Appends the records of a commit stream. `format` is "ndjson" or "gitlog";
 * `repo_id` names the repository for gitlog input and is ignored otherwise.
 * Malformed records are skipped and remembered (see ta_dataset_errors_json).
 */
TIMEAUDIT_API ta_status ta_dataset_load_file(ta_dataset* ds, const char* path, const char* format,
                                             const char* repo_id);
TIMEAUDIT_API ta_status ta_dataset_load_buffer(ta_dataset* ds, const char* data, size_t size,
                                               const char* format, const char* repo_id,
                                               const char* source_name);

TIMEAUDIT_API size_t ta_dataset_size(const ta_dataset* ds);
TIMEAUDIT_API size_t ta_dataset_error_count(const ta_dataset* ds);

/* JSON array of {"source","line","reason"}. */
TIMEAUDIT_API ta_status ta_dataset_errors_json(const ta_dataset* ds, char** out);

/* Canonical NDJSON, one record per line, in dataset order. */
TIMEAUDIT_API ta_status ta_dataset_to_ndjson(const ta_dataset* ds, char** out);

/*
 * Runs the detectors. `options_json` may be NULL or an object with keys
 * snapshot_date, old_cutoff (ISO-8601), date_field, include_merges,
 * detectors (array of names), workers, manifest (object).
 * `anomaly_count` may be NULL.
 */
TIMEAUDIT_API ta_status ta_scan(const ta_dataset* ds, const char* options_json, char** report_json,
                                size_t* anomaly_count);

/*
 * Applies a policy document in order. The sanitized records land in a new
 * dataset owned by the caller; the removal ledger document in
 * `ledger_json`. `options_json` accepts date_field and include_merges.
 */
TIMEAUDIT_API ta_status ta_filter(const ta_dataset* ds, const char* policy_json, const char* options_json,
                                  ta_dataset** out, char** ledger_json);

/* Table document (delta statistics, histogram, tokens, top-K) from a report. */
TIMEAUDIT_API ta_status ta_stats(const char* report_json, char** tables_json);

/* One CSV table of a tables document, e.g. "delta_stats.csv". */
TIMEAUDIT_API ta_status ta_stats_csv(const char* tables_json, const char* table_name, char** csv);

/* Newline-separated names accepted by ta_stats_csv. */
TIMEAUDIT_API ta_status ta_stats_csv_names(const char* tables_json, char** names);

/*
 * Checks the report's linear out-of-order candidates against the metadata
 * sources described by `sources_json`. `base_dir` anchors relative paths in
 * the sources document and may be NULL.
 */
TIMEAUDIT_API ta_status ta_verify(const char* report_json, const char* sources_json, const char* base_dir,
                                  char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* TIMEAUDIT_H */
