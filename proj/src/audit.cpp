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

#include "timeaudit/audit.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>
#include <unordered_map>

#include "timeaudit/analytics.hpp"
#include "timeaudit/commit_graph.hpp"

namespace timeaudit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kTopK = 20;
constexpr std::size_t kTokenRows = 20;

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  return format_iso8601(Timestamp{secs, 0});
}

ordered_json header(std::string_view schema) {
  ordered_json doc;
  doc["schema"] = schema;
  doc["schema_version"] = kReportSchemaVersion;
  doc["generated_at"] = now_iso8601();
  doc["tool"] = {{"name", "timeaudit"}, {"version", kToolVersion}};
  return doc;
}

ordered_json manifest_to_json(const DatasetManifest& m) {
  ordered_json doc;
  doc["name"] = m.name;
  doc["snapshot_date"] = format_iso8601(m.snapshot_date);
  doc["repos"] = m.repos;
  return doc;
}

ordered_json stats_to_json(const DeltaStats& s) {
  ordered_json doc;
  doc["n"] = s.n;
  doc["mean"] = s.mean;
  doc["std"] = s.std;
  doc["min"] = s.min;
  doc["p25"] = s.p25;
  doc["p50"] = s.p50;
  doc["p75"] = s.p75;
  doc["max"] = s.max;
  return doc;
}

ordered_json histogram_to_json(const DeltaHistogram& h) {
  ordered_json rows = ordered_json::array();
  for (const auto& b : h.buckets) {
    ordered_json row;
    row["label"] = b.label;
    row["upper_bound_seconds"] = b.upper_bound ? ordered_json(*b.upper_bound) : ordered_json(nullptr);
    row["count"] = b.count;
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json histogram_metadata() {
  ordered_json meta;
  meta["bucket_upper_bounds_seconds"] = kHistogramBounds;
  meta["last_bucket"] = "unbounded";
  meta["month_days"] = 30;
  meta["year_days"] = 365;
  meta["inclusive_upper_bounds"] = true;
  return meta;
}

// Delta stats and histogram per out-of-order kind; null when no deltas.
ordered_json delta_tables(std::span<const Anomaly> anomalies) {
  ordered_json out;
  for (AnomalyKind kind : {AnomalyKind::OutOfOrderParent, AnomalyKind::OutOfOrderLinear}) {
    std::vector<std::int64_t> deltas;
    for (const auto& a : anomalies)
      if (a.kind == kind && a.delta_seconds) deltas.push_back(*a.delta_seconds);
    ordered_json entry;
    if (deltas.empty()) {
      entry["delta_stats"] = nullptr;
      entry["delta_histogram"] = nullptr;
    } else {
      entry["delta_stats"] = stats_to_json(delta_statistics(deltas));
      entry["delta_histogram"] = histogram_to_json(delta_histogram(deltas));
    }
    out[std::string(to_string(kind))] = std::move(entry);
  }
  return out;
}

ordered_json summary_to_json(const AnomalySummary& s) {
  ordered_json doc;
  for (const auto& [kind, count] : s.per_kind)
    doc[std::string(to_string(kind))] = {{"commits", count.commits}, {"projects", count.projects}};
  doc["total"] = {{"commits", s.total.commits}, {"projects", s.total.projects}};
  return doc;
}

ordered_json ranked_to_json(const RankedCounts& rows, const char* id_key) {
  ordered_json out = ordered_json::array();
  for (const auto& [id, count] : rows) out.push_back({{id_key, id}, {"count", count}});
  return out;
}

ordered_json tokens_to_json(const TokenTable& table) {
  ordered_json out = ordered_json::array();
  for (const auto& row : table) out.push_back({{"token", row.token}, {"count", row.count}});
  return out;
}

struct RepoScan {
  std::vector<Anomaly> anomalies;
  std::size_t dangling = 0;
  std::size_t edges = 0;
};

RepoScan scan_repo(std::vector<CommitRecord> records, const ScanOptions& opt) {
  const auto& cfg = opt.config;
  const auto& on = opt.detectors;
  RepoScan out;
  auto graph = CommitGraph::build(std::move(records));
  out.dangling = graph.dangling_parents().size();
  out.edges = graph.edge_count();
  auto append = [&](std::vector<Anomaly> found) {
    out.anomalies.insert(out.anomalies.end(), std::make_move_iterator(found.begin()),
                         std::make_move_iterator(found.end()));
  };
  if (on.count(Detector::old)) append(detect_old(graph.nodes(), cfg));
  if (on.count(Detector::future)) append(detect_future(graph.nodes(), cfg));
  if (on.count(Detector::linear)) append(detect_out_of_order_linear(ordered_records(graph), cfg));
  if (on.count(Detector::ooo)) append(detect_out_of_order_parents(graph, cfg));
  if (on.count(Detector::signatures)) append(detect_tool_signatures(graph.nodes()));
  if (on.count(Detector::verified)) append(detect_verified_mismatch(graph, cfg));
  return out;
}

// Runs scan_repo over every repository; results come back in repo order and
// the first failure (in repo order) is rethrown.
std::vector<RepoScan> scan_all(std::vector<std::vector<CommitRecord>> repos, const ScanOptions& opt) {
  std::vector<RepoScan> results(repos.size());
  std::vector<std::exception_ptr> errors(repos.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < repos.size(); i = next++) {
      try {
        results[i] = scan_repo(std::move(repos[i]), opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(opt.workers, repos.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

ordered_json commit_to_json(const CommitRecord& r) {
  ordered_json doc;
  doc["hash"] = r.hash;
  doc["repo"] = r.repo_id;
  doc["committer"] = r.committer_id;
  doc["author"] = r.author_id;
  doc["committer_date"] = format_iso8601(r.committer_date);
  doc["author_date"] = format_iso8601(r.author_date);
  doc["verified"] = to_string(r.verified);
  doc["message"] = r.message;
  return doc;
}

const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw SchemaError(std::string("document lacks '") + key + "'");
  return *it;
}

void check_report(const json& report) {
  if (!report.is_object()) throw SchemaError("report is not a JSON object");
  if (report.value("schema", "") != "timeaudit.report") throw SchemaError("not a timeaudit report");
  if (report.value("schema_version", 0) != kReportSchemaVersion)
    throw SchemaError("unsupported report schema_version");
  if (!require(report, "anomalies").is_array()) throw SchemaError("'anomalies' must be an array");
}

std::vector<Anomaly> report_anomalies(const json& report) {
  std::vector<Anomaly> out;
  for (const auto& a : report["anomalies"]) out.push_back(anomaly_from_json(a));
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_value(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return csv_field(v.get<std::string>());
  return v.dump();
}

}  // namespace

std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::old: return "old";
    case Detector::future: return "future";
    case Detector::ooo: return "ooo";
    case Detector::linear: return "linear";
    case Detector::signatures: return "signatures";
    case Detector::verified: return "verified";
  }
  return "?";
}

std::optional<Detector> parse_detector(std::string_view text) {
  for (auto d : {Detector::old, Detector::future, Detector::ooo, Detector::linear, Detector::signatures,
                 Detector::verified})
    if (to_string(d) == text) return d;
  return std::nullopt;
}

const std::set<Detector>& default_detectors() {
  static const std::set<Detector> all = {Detector::old,    Detector::future,     Detector::ooo,
                                         Detector::linear, Detector::signatures, Detector::verified};
  return all;
}

ordered_json anomaly_to_json(const Anomaly& a) {
  ordered_json doc;
  doc["kind"] = to_string(a.kind);
  doc["commit"] = a.commit_hash;
  doc["repo"] = a.repo_id;
  doc["evidence"] = a.evidence;
  if (a.delta_seconds) doc["delta_seconds"] = *a.delta_seconds;
  return doc;
}

Anomaly anomaly_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("anomaly entries must be objects");
  Anomaly a;
  auto kind = parse_anomaly_kind(doc.value("kind", ""));
  if (!kind) throw SchemaError("unknown anomaly kind");
  a.kind = *kind;
  try {
    a.commit_hash = require(doc, "commit").get<std::string>();
    a.repo_id = require(doc, "repo").get<std::string>();
    a.evidence = doc.value("evidence", "");
    if (auto it = doc.find("delta_seconds"); it != doc.end() && !it->is_null())
      a.delta_seconds = it->get<std::int64_t>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad anomaly entry: ") + e.what());
  }
  if (is_out_of_order(a.kind) != a.delta_seconds.has_value())
    throw SchemaError("delta_seconds must be present exactly for out-of-order kinds");
  return a;
}

DatasetManifest parse_manifest_document(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw SchemaError("manifest is not a JSON object");
  DatasetManifest m;
  m.name = doc.value("name", "");
  const json& snap = require(doc, "snapshot_date");
  if (snap.is_number_integer()) {
    m.snapshot_date = Timestamp{snap.get<std::int64_t>(), 0};
  } else if (snap.is_string()) {
    auto ts = parse_timestamp(snap.get<std::string>());
    if (!ts) throw SchemaError("manifest snapshot_date is not ISO-8601");
    m.snapshot_date = *ts;
  } else {
    throw SchemaError("manifest snapshot_date must be a string or integer");
  }
  if (doc.contains("repos")) {
    try {
      m.repos = doc["repos"].get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw SchemaError("manifest repos must be an array of strings");
    }
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return m;
}

ScanResult run_scan(std::vector<CommitRecord> records, const std::vector<InputError>& input_errors,
                    const ScanOptions& options) {
  ScanOptions opt = options;
  if (!opt.config.future_cutoff && opt.manifest) opt.config.future_cutoff = opt.manifest->snapshot_date;
  if (opt.detectors.count(Detector::future) && !opt.config.future_cutoff) throw MissingSnapshotDate();
  opt.config.validate();

  const std::size_t records_in = records.size();
  auto dedup = deduplicate(std::move(records));

  // Kept for the "commits" section of the report.
  std::unordered_map<std::string, CommitRecord> by_hash;
  by_hash.reserve(dedup.records.size());
  for (const auto& r : dedup.records) by_hash.emplace(r.hash, r);

  auto repos = split_by_repo(std::move(dedup.records));
  const std::size_t repo_count = repos.size();
  auto scans = scan_all(std::move(repos), opt);

  std::vector<Anomaly> anomalies;
  std::size_t dangling = 0;
  std::size_t edges = 0;
  for (auto& s : scans) {
    dangling += s.dangling;
    edges += s.edges;
    anomalies.insert(anomalies.end(), std::make_move_iterator(s.anomalies.begin()),
                     std::make_move_iterator(s.anomalies.end()));
  }
  sort_anomalies(anomalies);

  ordered_json report = header("timeaudit.report");
  report["manifest"] = opt.manifest ? manifest_to_json(*opt.manifest) : ordered_json(nullptr);

  ordered_json config;
  config["old_cutoff"] = format_iso8601(opt.config.old_cutoff);
  config["future_cutoff"] =
      opt.config.future_cutoff ? ordered_json(format_iso8601(*opt.config.future_cutoff)) : ordered_json(nullptr);
  config["date_field"] = to_string(opt.config.date_field);
  config["exclude_merges"] = opt.config.exclude_merges;
  config["detectors"] = ordered_json::array();
  for (auto d : opt.detectors) config["detectors"].push_back(to_string(d));
  report["config"] = std::move(config);

  ordered_json input;
  input["records_in"] = records_in;
  input["malformed"] = ordered_json::array();
  for (const auto& e : input_errors)
    input["malformed"].push_back({{"source", e.source}, {"line", e.line}, {"reason", e.reason}});
  ordered_json dup = ordered_json::array();
  for (const auto& d : dedup.report.duplicate_hashes) dup.push_back({{"hash", d.hash}, {"occurrences", d.occurrences}});
  input["dedup"] = {{"total_in", dedup.report.total_in},
                    {"unique_out", dedup.report.unique_out},
                    {"duplicate_hashes", std::move(dup)},
                    {"conflicts", dedup.report.conflicts}};
  input["repos"] = repo_count;
  input["edges"] = edges;
  input["dangling_parents"] = dangling;
  report["input"] = std::move(input);

  report["summary"] = summary_to_json(summarize(anomalies));
  report["anomalies"] = ordered_json::array();
  for (const auto& a : anomalies) report["anomalies"].push_back(anomaly_to_json(a));

  std::set<std::pair<std::string, std::string>> referenced;
  for (const auto& a : anomalies) referenced.emplace(a.repo_id, a.commit_hash);
  report["commits"] = ordered_json::array();
  for (const auto& [repo, hash] : referenced) report["commits"].push_back(commit_to_json(by_hash.at(hash)));

  std::vector<Anomaly> old_list, ooo_list;
  for (const auto& a : anomalies) {
    if (a.kind == AnomalyKind::Old) old_list.push_back(a);
    if (a.kind == AnomalyKind::OutOfOrderParent) ooo_list.push_back(a);
  }
  report["intersections"] = {{"old_and_out_of_order_parent", intersect_anomalies(old_list, ooo_list)}};
  report["ledgers"] = ordered_json::array();
  report["stats"] = delta_tables(anomalies);

  return {std::move(report), anomalies.size()};
}

FilterRun run_filter(std::vector<CommitRecord> records, std::span<const FilterPolicy> policies,
                     const DetectorConfig& cfg) {
  const std::size_t input = records.size();
  auto result = apply_policies(std::move(records), policies, cfg);

  ordered_json doc = header("timeaudit.ledger");
  doc["date_field"] = to_string(cfg.date_field);
  doc["exclude_merges"] = cfg.exclude_merges;
  doc["input_commits"] = input;
  doc["output_commits"] = result.records.size();
  doc["ledgers"] = ordered_json::array();
  for (const auto& l : result.ledgers) {
    ordered_json row;
    row["policy"] = describe(l.policy);
    row["kind"] = policy_kind(l.policy);
    row["input_commits"] = l.input_commits;
    row["removed_commits"] = l.removed_commits;
    row["retained_commits"] = l.retained_commits;
    row["removed_projects"] = l.removed_projects;
    row["repos_missing_stars"] = l.repos_missing_stars;
    row["removed_percent"] =
        l.input_commits == 0 ? 0.0 : 100.0 * static_cast<double>(l.removed_commits) / static_cast<double>(l.input_commits);
    doc["ledgers"].push_back(std::move(row));
  }
  doc["policies"] = ordered_json::parse(policy_document(policies))["policies"];
  return {std::move(result.records), std::move(doc)};
}

ordered_json run_stats(const json& report) {
  check_report(report);
  const auto anomalies = report_anomalies(report);

  std::vector<CommitRecord> records;
  if (auto it = report.find("commits"); it != report.end() && it->is_array()) {
    for (const auto& c : *it) {
      CommitRecord r;
      r.hash = c.value("hash", "");
      r.repo_id = c.value("repo", "");
      r.committer_id = c.value("committer", "");
      r.message = c.value("message", "");
      records.push_back(std::move(r));
    }
  }
  std::unordered_map<std::string, const CommitRecord*> record_of;
  for (const auto& r : records) record_of.emplace(r.hash, &r);

  // Bad commits: anything with a time anomaly.
  std::vector<Anomaly> bad;
  std::set<std::string> old_hashes, ooo_hashes;
  bool have_parent_kind = false;
  for (const auto& a : anomalies) {
    if (!is_time_anomaly(a.kind)) continue;
    bad.push_back(a);
    if (a.kind == AnomalyKind::Old) old_hashes.insert(a.commit_hash);
    if (a.kind == AnomalyKind::OutOfOrderParent) have_parent_kind = true;
  }
  const AnomalyKind ooo_kind = have_parent_kind ? AnomalyKind::OutOfOrderParent : AnomalyKind::OutOfOrderLinear;
  for (const auto& a : anomalies)
    if (a.kind == ooo_kind) ooo_hashes.insert(a.commit_hash);

  auto messages_of = [&](const std::set<std::string>& hashes) {
    std::vector<std::string> out;
    for (const auto& h : hashes)
      if (auto it = record_of.find(h); it != record_of.end()) out.push_back(it->second->message);
    return out;
  };

  ordered_json tables = header("timeaudit.tables");
  tables["summary"] = summary_to_json(summarize(anomalies));
  tables["histogram"] = histogram_metadata();
  tables["deltas"] = delta_tables(anomalies);
  ordered_json tokens;
  tokens["old"] = tokens_to_json(token_frequency(messages_of(old_hashes), {"git-svn-id"}, kTokenRows));
  tokens["old_excluded_terms"] = {"git-svn-id"};
  tokens["out_of_order"] = tokens_to_json(token_frequency(messages_of(ooo_hashes), {}, kTokenRows));
  tokens["out_of_order_kind"] = to_string(ooo_kind);
  tables["tokens"] = std::move(tokens);
  tables["top_committers"] = ranked_to_json(top_committers(bad, records, kTopK), "committer");
  tables["top_projects"] = ranked_to_json(top_projects(bad, kTopK), "project");
  return tables;
}

std::map<std::string, std::string> tables_to_csv(const json& tables) {
  if (!tables.is_object() || tables.value("schema", "") != "timeaudit.tables")
    throw SchemaError("not a timeaudit tables document");
  std::map<std::string, std::string> out;

  std::string summary = "kind,commits,projects\n";
  for (const auto& [kind, row] : require(tables, "summary").items())
    summary += kind + "," + csv_value(row["commits"]) + "," + csv_value(row["projects"]) + "\n";
  out["summary.csv"] = std::move(summary);

  std::string stats = "kind,n,mean,std,min,p25,p50,p75,max\n";
  std::string hist = "kind,bucket,upper_bound_seconds,count\n";
  for (const auto& [kind, entry] : require(tables, "deltas").items()) {
    const auto& s = entry["delta_stats"];
    if (!s.is_null()) {
      stats += kind;
      for (const char* key : {"n", "mean", "std", "min", "p25", "p50", "p75", "max"}) stats += "," + csv_value(s[key]);
      stats += "\n";
    }
    const auto& h = entry["delta_histogram"];
    if (!h.is_null())
      for (const auto& b : h)
        hist += kind + "," + csv_value(b["label"]) + "," + csv_value(b["upper_bound_seconds"]) + "," +
                csv_value(b["count"]) + "\n";
  }
  out["delta_stats.csv"] = std::move(stats);
  out["delta_histogram.csv"] = std::move(hist);

  std::string tokens = "table,rank,token,count\n";
  for (const char* table : {"old", "out_of_order"}) {
    std::size_t rank = 0;
    for (const auto& row : require(tables, "tokens")[table])
      tokens += std::string(table) + "," + std::to_string(++rank) + "," + csv_value(row["token"]) + "," +
                csv_value(row["count"]) + "\n";
  }
  out["tokens.csv"] = std::move(tokens);

  for (auto [file, key, id] : {std::tuple{"top_committers.csv", "top_committers", "committer"},
                               std::tuple{"top_projects.csv", "top_projects", "project"}}) {
    std::string csv = std::string("rank,") + id + ",count\n";
    std::size_t rank = 0;
    for (const auto& row : require(tables, key))
      csv += std::to_string(++rank) + "," + csv_value(row[id]) + "," + csv_value(row["count"]) + "\n";
    out[file] = std::move(csv);
  }
  return out;
}

ordered_json run_verify(const json& report, ForgeClient& client) {
  check_report(report);
  DetectorConfig cfg;
  if (auto it = report.find("config"); it != report.end() && it->is_object()) {
    cfg.exclude_merges = it->value("exclude_merges", true);
    if (auto f = parse_date_field(it->value("date_field", "committer"))) cfg.date_field = *f;
  }
  std::vector<Anomaly> candidates;
  for (auto& a : report_anomalies(report))
    if (a.kind == AnomalyKind::OutOfOrderLinear) candidates.push_back(std::move(a));

  auto result = verify_anomalies(candidates, client, cfg);
  const auto& acc = result.accounting;

  ordered_json doc = header("timeaudit.verification");
  ordered_json accounting;
  accounting["input"] = acc.input;
  accounting["confirmed_on_forge"] = acc.confirmed_on_forge;
  accounting["confirmed_on_archive"] = acc.confirmed_on_archive;
  accounting["unverifiable"] = acc.unverifiable;
  accounting["percent"] = {{"confirmed_on_forge", acc.percent(acc.confirmed_on_forge)},
                           {"confirmed_on_archive", acc.percent(acc.confirmed_on_archive)},
                           {"unverifiable", acc.percent(acc.unverifiable)}};
  accounting["confirmed_out_of_order"] = acc.confirmed;
  accounting["false_positives"] = acc.false_positives;
  doc["accounting"] = std::move(accounting);
  doc["confirmed"] = ordered_json::array();
  for (const auto& a : result.confirmed) doc["confirmed"].push_back(anomaly_to_json(a));
  doc["dropped"] = ordered_json::array();
  for (const auto& a : result.dropped) doc["dropped"].push_back(anomaly_to_json(a));
  doc["outcomes"] = ordered_json::array();
  for (const auto& o : result.outcomes) {
    ordered_json row;
    row["commit"] = o.commit_hash;
    row["status"] = to_string(o.status);
    row["answered_by"] = o.answered_by ? ordered_json(to_string(*o.answered_by)) : ordered_json(nullptr);
    row["verified"] = to_string(o.verified_flag);
    row["parents"] = o.parents;
    doc["outcomes"].push_back(std::move(row));
  }
  return doc;
}

std::string dump_document(const ordered_json& doc) {
  return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string strip_generated_at(std::string_view text) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.starts_with("  \"generated_at\": ")) {
      out += line;
      out += '\n';
    }
    start = end + 1;
  }
  return out;
}

}  // namespace timeaudit
