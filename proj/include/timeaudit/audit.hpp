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

#pragma once

// End-to-end audit commands behind the C API: scan, filter, stats, verify.
// Every document produced here is deterministic for fixed inputs except for
// the top-level "generated_at" field.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "timeaudit/detectors.hpp"
#include "timeaudit/filters.hpp"
#include "timeaudit/forge_client.hpp"
#include "timeaudit/ingest.hpp"

namespace timeaudit {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "1.0.0";

enum class Detector { old, future, ooo, linear, signatures, verified };

std::string_view to_string(Detector d);
std::optional<Detector> parse_detector(std::string_view text);
const std::set<Detector>& default_detectors();

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure that carries where it came from.
struct InputError {
  std::string source;
  std::size_t line = 0;
  std::string reason;
};

struct ScanOptions {
  DetectorConfig config;
  std::set<Detector> detectors = default_detectors();
  std::optional<DatasetManifest> manifest;
  std::size_t workers = 1;
};

struct ScanResult {
  nlohmann::ordered_json report;
  std::size_t anomaly_count = 0;
};

/// Deduplicates, builds one graph per repository (in parallel when
/// workers > 1) and runs the enabled detectors. A manifest snapshot date
/// fills in a missing future cutoff. Throws MissingSnapshotDate,
/// CycleDetected, std::invalid_argument.
ScanResult run_scan(std::vector<CommitRecord> records, const std::vector<InputError>& input_errors,
                    const ScanOptions& options);

struct FilterRun {
  std::vector<CommitRecord> records;
  nlohmann::ordered_json ledger;
};

FilterRun run_filter(std::vector<CommitRecord> records, std::span<const FilterPolicy> policies,
                     const DetectorConfig& cfg);

/// Table document from a scan report. Throws SchemaError.
nlohmann::ordered_json run_stats(const nlohmann::json& report);

/// CSV renderings of a table document, keyed by file name.
std::map<std::string, std::string> tables_to_csv(const nlohmann::json& tables);

/// Verifies the report's OutOfOrderLinear candidates. Throws SchemaError.
nlohmann::ordered_json run_verify(const nlohmann::json& report, ForgeClient& client);

nlohmann::ordered_json anomaly_to_json(const Anomaly& a);
Anomaly anomaly_from_json(const nlohmann::json& doc);

DatasetManifest parse_manifest_document(std::string_view text);

/// Serializes with two-space indentation and a trailing newline.
std::string dump_document(const nlohmann::ordered_json& doc);

/// Removes the top-level "generated_at" line from dump_document output.
std::string strip_generated_at(std::string_view text);

}  // namespace timeaudit
