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

// Command-line front end. Talks to the library only through timeaudit.h.
//
// Exit codes: 0 clean / success, 1 anomalies found (scan), 2 bad input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "timeaudit.h"

namespace {

using json = nlohmann::json;

constexpr int kExitClean = 0;
constexpr int kExitAnomalies = 1;
constexpr int kExitInputError = 2;

struct CString {
  char* p = nullptr;
  ~CString() { ta_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct DatasetDeleter {
  void operator()(ta_dataset* ds) const { ta_dataset_free(ds); }
};
using Dataset = std::unique_ptr<ta_dataset, DatasetDeleter>;

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(ta_status status, const std::string& what) {
  if (status != TA_OK)
    throw CommandError(what + ": " + ta_status_name(status) + ": " + ta_last_error());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CommandError("cannot write '" + path + "'");
  out << text;
}

struct InputFlags {
  std::vector<std::string> paths;
  std::string format = "ndjson";
  std::string repo;
};

void add_input_flags(CLI::App* cmd, InputFlags& in) {
  cmd->add_option("inputs", in.paths, "Commit streams to read")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", in.format, "Input format")->check(CLI::IsMember({"ndjson", "gitlog"}));
  cmd->add_option("--repo", in.repo, "Repository id for gitlog input (default: file stem)");
}

Dataset load_inputs(const InputFlags& in) {
  ta_dataset* raw = nullptr;
  check(ta_dataset_create(&raw), "create dataset");
  Dataset ds(raw);
  for (const auto& path : in.paths) {
    const std::string repo = in.repo.empty() ? std::filesystem::path(path).stem().string() : in.repo;
    check(ta_dataset_load_file(ds.get(), path.c_str(), in.format.c_str(), repo.c_str()), "load " + path);
  }
  if (ta_dataset_error_count(ds.get()) > 0) {
    CString errors;
    check(ta_dataset_errors_json(ds.get(), &errors.p), "read parse errors");
    for (const auto& e : json::parse(errors.str()))
      std::cerr << "timeaudit: " << e["source"].get<std::string>() << ":" << e["line"] << ": malformed record: "
                << e["reason"].get<std::string>() << "\n";
  }
  return ds;
}

struct DetectorFlags {
  std::string snapshot_date;
  std::string old_cutoff = "1990-11-19T00:00:00Z";
  std::string date_field = "committer";
  bool include_merges = false;
};

void add_detector_flags(CLI::App* cmd, DetectorFlags& f, bool with_cutoffs) {
  if (with_cutoffs) {
    cmd->add_option("--snapshot-date", f.snapshot_date, "Dataset snapshot instant (ISO-8601)");
    cmd->add_option("--old-cutoff", f.old_cutoff, "Commits strictly before this are Old")->capture_default_str();
  }
  cmd->add_option("--date-field", f.date_field, "Timestamp to audit")
      ->check(CLI::IsMember({"committer", "author"}))
      ->capture_default_str();
  cmd->add_flag("--include-merges", f.include_merges, "Do not skip commits whose messages mention merges");
}

json detector_options(const DetectorFlags& f, bool with_cutoffs) {
  json opts;
  if (with_cutoffs) {
    opts["old_cutoff"] = f.old_cutoff;
    if (!f.snapshot_date.empty()) opts["snapshot_date"] = f.snapshot_date;
  }
  opts["date_field"] = f.date_field;
  opts["include_merges"] = f.include_merges;
  return opts;
}

void write_csv_tables(const std::string& tables, const std::string& dir) {
  std::filesystem::create_directories(dir);
  CString names;
  check(ta_stats_csv_names(tables.c_str(), &names.p), "list tables");
  std::istringstream lines(names.str());
  for (std::string name; std::getline(lines, name);) {
    CString csv;
    check(ta_stats_csv(tables.c_str(), name.c_str(), &csv.p), "render " + name);
    write_output((std::filesystem::path(dir) / name).string(), csv.str());
  }
}

void print_summary(const std::string& report) {
  const json doc = json::parse(report);
  std::cerr << "kind                commits  projects\n";
  for (const auto& [kind, row] : doc["summary"].items()) {
    char line[96];
    std::snprintf(line, sizeof line, "%-18s %8zu %9zu\n", kind.c_str(), row["commits"].get<std::size_t>(),
                  row["projects"].get<std::size_t>());
    std::cerr << line;
  }
}

int run_scan(const InputFlags& in, const DetectorFlags& det, const std::string& detectors,
             const std::string& manifest, std::size_t workers, const std::string& report_path,
             const std::string& csv_dir) {
  auto ds = load_inputs(in);
  json opts = detector_options(det, true);
  opts["workers"] = workers;
  if (!detectors.empty()) {
    opts["detectors"] = json::array();
    std::istringstream list(detectors);
    for (std::string name; std::getline(list, name, ',');)
      if (!name.empty()) opts["detectors"].push_back(name);
  }
  if (!manifest.empty()) opts["manifest"] = json::parse(read_file(manifest));

  CString report;
  std::size_t count = 0;
  check(ta_scan(ds.get(), opts.dump().c_str(), &report.p, &count), "scan");
  write_output(report_path, report.str());
  if (!csv_dir.empty()) {
    CString tables;
    check(ta_stats(report.p, &tables.p), "stats");
    write_csv_tables(tables.str(), csv_dir);
  }
  print_summary(report.str());
  return count == 0 ? kExitClean : kExitAnomalies;
}

int run_filter(const InputFlags& in, const DetectorFlags& det, const std::string& policy_file,
               const std::string& output, const std::string& ledger_path) {
  auto ds = load_inputs(in);
  const std::string policies = read_file(policy_file);
  ta_dataset* raw = nullptr;
  CString ledger;
  check(ta_filter(ds.get(), policies.c_str(), detector_options(det, false).dump().c_str(), &raw, &ledger.p),
        "filter");
  Dataset out(raw);
  CString ndjson;
  check(ta_dataset_to_ndjson(out.get(), &ndjson.p), "serialize");
  write_output(output, ndjson.str());
  if (!ledger_path.empty()) write_output(ledger_path, ledger.str());

  for (const auto& row : json::parse(ledger.str())["ledgers"])
    std::cerr << row["policy"].get<std::string>() << ": removed " << row["removed_commits"] << " of "
              << row["input_commits"] << " commits, " << row["removed_projects"] << " projects\n";
  return kExitClean;
}

int run_stats(const std::string& report_path, const std::string& output, const std::string& csv_dir) {
  const std::string report = read_file(report_path);
  CString tables;
  check(ta_stats(report.c_str(), &tables.p), "stats");
  write_output(output, tables.str());
  if (!csv_dir.empty()) write_csv_tables(tables.str(), csv_dir);
  return kExitClean;
}

int run_verify(const std::string& report_path, const std::string& sources_path, const std::string& output) {
  const std::string report = read_file(report_path);
  const std::string sources = read_file(sources_path);
  const std::string base = std::filesystem::absolute(sources_path).parent_path().string();
  CString result;
  check(ta_verify(report.c_str(), sources.c_str(), base.c_str(), &result.p), "verify");
  write_output(output, result.str());

  const json acc = json::parse(result.str())["accounting"];
  std::fprintf(stderr,
               "candidates %zu: on forge %zu (%.2f%%), on archive %zu (%.2f%%), unverifiable %zu (%.2f%%)\n"
               "confirmed out-of-order %zu, false positives %zu\n",
               acc["input"].get<std::size_t>(), acc["confirmed_on_forge"].get<std::size_t>(),
               acc["percent"]["confirmed_on_forge"].get<double>(), acc["confirmed_on_archive"].get<std::size_t>(),
               acc["percent"]["confirmed_on_archive"].get<double>(), acc["unverifiable"].get<std::size_t>(),
               acc["percent"]["unverifiable"].get<double>(), acc["confirmed_out_of_order"].get<std::size_t>(),
               acc["false_positives"].get<std::size_t>());
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit commit timestamps in mined Git histories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ta_version()));

  InputFlags scan_in;
  DetectorFlags scan_det;
  std::string detectors, manifest, report_path, csv_dir;
  std::size_t workers = 4;
  auto* scan = app.add_subcommand("scan", "Detect old, future and out-of-order commits");
  add_input_flags(scan, scan_in);
  add_detector_flags(scan, scan_det, true);
  scan->add_option("--detectors", detectors, "Comma list of old,future,ooo,linear,signatures,verified");
  scan->add_option("--manifest", manifest, "Dataset manifest (name, snapshot_date, repos)")
      ->check(CLI::ExistingFile);
  scan->add_option("--workers", workers, "Repositories scanned in parallel")->check(CLI::PositiveNumber);
  scan->add_option("--report", report_path, "Write the report here instead of stdout");
  scan->add_option("--csv-dir", csv_dir, "Also write CSV tables to this directory");

  InputFlags filter_in;
  DetectorFlags filter_det;
  std::string policy_file, filter_out, ledger_path;
  auto* filter = app.add_subcommand("filter", "Apply cleaning policies and emit sanitized NDJSON");
  add_input_flags(filter, filter_in);
  add_detector_flags(filter, filter_det, false);
  filter->add_option("--policy-file", policy_file, "Policy document")->required()->check(CLI::ExistingFile);
  filter->add_option("--output,-o", filter_out, "Sanitized NDJSON (default stdout)");
  filter->add_option("--report,--ledger", ledger_path, "Write the removal ledger here");

  std::string stats_report, stats_out, stats_csv;
  auto* stats = app.add_subcommand("stats", "Delta statistics, histogram, token and top-K tables");
  stats->add_option("scan_report", stats_report, "Report produced by scan")->required()->check(CLI::ExistingFile);
  stats->add_option("--report,--output,-o", stats_out, "Write the tables document here (default stdout)");
  stats->add_option("--csv-dir", stats_csv, "Also write CSV tables to this directory");

  std::string verify_report, sources, verify_out;
  auto* verify = app.add_subcommand("verify", "Re-check linear out-of-order candidates against true parents");
  verify->add_option("scan_report", verify_report, "Report produced by scan")->required()->check(CLI::ExistingFile);
  verify->add_option("--sources", sources, "Metadata sources document")->required()->check(CLI::ExistingFile);
  verify->add_option("--report,--output,-o", verify_out, "Write the verification document here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*scan) return run_scan(scan_in, scan_det, detectors, manifest, workers, report_path, csv_dir);
    if (*filter) return run_filter(filter_in, filter_det, policy_file, filter_out, ledger_path);
    if (*stats) return run_stats(stats_report, stats_out, stats_csv);
    if (*verify) return run_verify(verify_report, sources, verify_out);
  } catch (const std::exception& e) {
    std::cerr << "timeaudit: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
