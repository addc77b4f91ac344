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

#include "timeaudit.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "timeaudit/audit.hpp"

using json = nlohmann::json;
using namespace timeaudit;

struct ta_dataset {
  std::vector<CommitRecord> records;
  std::vector<InputError> errors;
};

namespace {

thread_local std::string g_last_error;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

char* dup_string(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

ta_status fail(ta_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, mapping exceptions onto status codes.
template <class F>
ta_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return TA_OK;
  } catch (const CycleDetected& e) {
    return fail(TA_ERR_CYCLE, e.what());
  } catch (const MissingSnapshotDate& e) {
    return fail(TA_ERR_MISSING_SNAPSHOT, e.what());
  } catch (const PolicyError& e) {
    return fail(TA_ERR_POLICY, e.what());
  } catch (const SourcesError& e) {
    return fail(TA_ERR_SOURCES, e.what());
  } catch (const SchemaError& e) {
    return fail(TA_ERR_SCHEMA, e.what());
  } catch (const IoError& e) {
    return fail(TA_ERR_IO, e.what());
  } catch (const json::parse_error& e) {
    return fail(TA_ERR_PARSE, e.what());
  } catch (const json::exception& e) {
    return fail(TA_ERR_SCHEMA, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(TA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(TA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TA_ERR_INTERNAL, "unknown error");
  }
}

json parse_json_arg(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return json::object();
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw std::invalid_argument(std::string(what) + " is not a JSON object");
  return doc;
}

Timestamp instant_option(const json& v, const char* key) {
  if (v.is_number_integer()) return Timestamp{v.get<std::int64_t>(), 0};
  if (v.is_string()) {
    if (auto ts = parse_timestamp(v.get<std::string>())) return *ts;
  }
  throw std::invalid_argument(std::string("option '") + key + "' must be ISO-8601 or epoch seconds");
}

DetectorConfig detector_options(const json& opts) {
  DetectorConfig cfg;
  if (auto it = opts.find("old_cutoff"); it != opts.end() && !it->is_null())
    cfg.old_cutoff = instant_option(*it, "old_cutoff");
  if (auto it = opts.find("snapshot_date"); it != opts.end() && !it->is_null())
    cfg.future_cutoff = instant_option(*it, "snapshot_date");
  if (auto it = opts.find("date_field"); it != opts.end() && !it->is_null()) {
    auto f = it->is_string() ? parse_date_field(it->get<std::string>()) : std::nullopt;
    if (!f) throw std::invalid_argument("option 'date_field' must be 'committer' or 'author'");
    cfg.date_field = *f;
  }
  if (auto it = opts.find("include_merges"); it != opts.end() && !it->is_null()) {
    if (!it->is_boolean()) throw std::invalid_argument("option 'include_merges' must be a boolean");
    cfg.exclude_merges = !it->get<bool>();
  }
  return cfg;
}

void load_into(ta_dataset* ds, std::string_view data, const char* format, const char* repo_id,
               std::string source) {
  auto fmt = parse_input_format(format ? format : "ndjson");
  if (!fmt) throw std::invalid_argument(std::string("unknown input format '") + format + "'");
  auto parsed = parse_commit_text(data, *fmt, repo_id ? repo_id : "");
  for (auto& r : parsed.records) ds->records.push_back(std::move(r));
  for (auto& e : parsed.errors) ds->errors.push_back({source, e.line, std::move(e.reason)});
}

}  // namespace

extern "C" {

const char* ta_version(void) { return kToolVersion.data(); }

const char* ta_last_error(void) { return g_last_error.c_str(); }

const char* ta_status_name(ta_status status) {
  switch (status) {
    case TA_OK: return "ok";
    case TA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TA_ERR_IO: return "i/o error";
    case TA_ERR_PARSE: return "parse error";
    case TA_ERR_CYCLE: return "cycle detected";
    case TA_ERR_MISSING_SNAPSHOT: return "missing snapshot date";
    case TA_ERR_POLICY: return "policy error";
    case TA_ERR_SCHEMA: return "schema mismatch";
    case TA_ERR_SOURCES: return "no usable metadata source";
    case TA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ta_string_free(char* s) { std::free(s); }

ta_status ta_dataset_create(ta_dataset** out) {
  if (!out) return fail(TA_ERR_INVALID_ARGUMENT, "null out-parameter");
  return guarded([&] { *out = new ta_dataset(); });
}

void ta_dataset_free(ta_dataset* ds) { delete ds; }

ta_status ta_dataset_load_file(ta_dataset* ds, const char* path, const char* format, const char* repo_id) {
  if (!ds || !path) return fail(TA_ERR_INVALID_ARGUMENT, "null dataset or path");
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(std::string("cannot open '") + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    load_into(ds, buf.str(), format, repo_id, path);
  });
}

ta_status ta_dataset_load_buffer(ta_dataset* ds, const char* data, size_t size, const char* format,
                                 const char* repo_id, const char* source_name) {
  if (!ds || (!data && size != 0)) return fail(TA_ERR_INVALID_ARGUMENT, "null dataset or data");
  return guarded([&] {
    load_into(ds, std::string_view(data ? data : "", size), format, repo_id, source_name ? source_name : "<buffer>");
  });
}

size_t ta_dataset_size(const ta_dataset* ds) { return ds ? ds->records.size() : 0; }

size_t ta_dataset_error_count(const ta_dataset* ds) { return ds ? ds->errors.size() : 0; }

ta_status ta_dataset_errors_json(const ta_dataset* ds, char** out) {
  if (!ds || !out) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    json arr = json::array();
    for (const auto& e : ds->errors) arr.push_back({{"source", e.source}, {"line", e.line}, {"reason", e.reason}});
    *out = dup_string(arr.dump());
  });
}

ta_status ta_dataset_to_ndjson(const ta_dataset* ds, char** out) {
  if (!ds || !out) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = dup_string(to_ndjson(ds->records)); });
}

ta_status ta_scan(const ta_dataset* ds, const char* options_json, char** report_json, size_t* anomaly_count) {
  if (!ds || !report_json) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const json opts = parse_json_arg(options_json, "scan options");
    ScanOptions scan;
    scan.config = detector_options(opts);
    if (auto it = opts.find("detectors"); it != opts.end() && !it->is_null()) {
      if (!it->is_array()) throw std::invalid_argument("option 'detectors' must be an array");
      scan.detectors.clear();
      for (const auto& d : *it) {
        auto parsed = d.is_string() ? parse_detector(d.get<std::string>()) : std::nullopt;
        if (!parsed) throw std::invalid_argument("unknown detector " + d.dump());
        scan.detectors.insert(*parsed);
      }
    }
    if (auto it = opts.find("workers"); it != opts.end() && !it->is_null()) {
      if (!it->is_number_unsigned() || it->get<std::size_t>() == 0)
        throw std::invalid_argument("option 'workers' must be a positive integer");
      scan.workers = it->get<std::size_t>();
    }
    if (auto it = opts.find("manifest"); it != opts.end() && !it->is_null())
      scan.manifest = parse_manifest_document(it->dump());

    auto result = run_scan(ds->records, ds->errors, scan);
    if (anomaly_count) *anomaly_count = result.anomaly_count;
    *report_json = dup_string(dump_document(result.report));
  });
}

ta_status ta_filter(const ta_dataset* ds, const char* policy_json, const char* options_json, ta_dataset** out,
                    char** ledger_json) {
  if (!ds || !policy_json || !out || !ledger_json) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto policies = parse_policy_document(policy_json);
    const DetectorConfig cfg = detector_options(parse_json_arg(options_json, "filter options"));
    auto run = run_filter(ds->records, policies, cfg);
    auto result = std::make_unique<ta_dataset>();
    result->records = std::move(run.records);
    char* ledger = dup_string(dump_document(run.ledger));
    *out = result.release();
    *ledger_json = ledger;
  });
}

ta_status ta_stats(const char* report_json, char** tables_json) {
  if (!report_json || !tables_json) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    json report = json::parse(report_json, nullptr, false);
    if (report.is_discarded()) throw SchemaError("report is not valid JSON");
    *tables_json = dup_string(dump_document(run_stats(report)));
  });
}

ta_status ta_stats_csv(const char* tables_json, const char* table_name, char** csv) {
  if (!tables_json || !table_name || !csv) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    json tables = json::parse(tables_json, nullptr, false);
    if (tables.is_discarded()) throw SchemaError("tables document is not valid JSON");
    const auto all = tables_to_csv(tables);
    auto it = all.find(table_name);
    if (it == all.end()) throw std::invalid_argument(std::string("no table named '") + table_name + "'");
    *csv = dup_string(it->second);
  });
}

ta_status ta_stats_csv_names(const char* tables_json, char** names) {
  if (!tables_json || !names) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    json tables = json::parse(tables_json, nullptr, false);
    if (tables.is_discarded()) throw SchemaError("tables document is not valid JSON");
    std::string list;
    for (const auto& [name, _] : tables_to_csv(tables)) list += name + "\n";
    *names = dup_string(list);
  });
}

ta_status ta_verify(const char* report_json, const char* sources_json, const char* base_dir, char** result_json) {
  if (!report_json || !sources_json || !result_json) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    json report = json::parse(report_json, nullptr, false);
    if (report.is_discarded()) throw SchemaError("report is not valid JSON");
    ForgeClient client(parse_sources_document(sources_json, base_dir ? base_dir : ""));
    *result_json = dup_string(dump_document(run_verify(report, client)));
  });
}

}  // extern "C"
