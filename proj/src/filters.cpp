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

#include "timeaudit/filters.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "json.hpp"
#include "timeaudit/commit_graph.hpp"
#include "timeaudit/ingest.hpp"

namespace timeaudit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// Partitions `records` by `keep` and fills in the ledger counts.
template <class Keep>
FilterResult partition(std::vector<CommitRecord> records, FilterPolicy policy, Keep keep) {
  FilterResult result{{}, RemovalLedger{std::move(policy)}};
  auto& ledger = result.ledger;
  ledger.input_commits = records.size();

  std::set<std::string> input_repos;
  std::set<std::string> kept_repos;
  result.records.reserve(records.size());
  for (auto& r : records) {
    input_repos.insert(r.repo_id);
    if (keep(r)) {
      kept_repos.insert(r.repo_id);
      result.records.push_back(std::move(r));
    }
  }
  ledger.retained_commits = result.records.size();
  ledger.removed_commits = ledger.input_commits - ledger.retained_commits;
  ledger.removed_projects = input_repos.size() - kept_repos.size();
  return result;
}

}  // namespace

std::string_view to_string(policy::Scope scope) {
  return scope == policy::Scope::commit ? "commit" : "project";
}

std::string_view policy_kind(const FilterPolicy& p) {
  return std::visit(overloaded{
                        [](const policy::MinTimestamp&) { return std::string_view("MinTimestamp"); },
                        [](const policy::BeforeDate&) { return std::string_view("BeforeDate"); },
                        [](const policy::ProjectBlocklist&) { return std::string_view("ProjectBlocklist"); },
                        [](const policy::DropOutOfOrder&) { return std::string_view("DropOutOfOrder"); },
                        [](const policy::MinStars&) { return std::string_view("MinStars"); },
                        [](const policy::TopKStars&) { return std::string_view("TopKStars"); },
                    },
                    p);
}

std::string describe(const FilterPolicy& p) {
  const std::string kind(policy_kind(p));
  return std::visit(
      overloaded{
          [&](const policy::MinTimestamp& m) { return kind + "(" + std::to_string(m.min_ts) + ")"; },
          [&](const policy::BeforeDate& b) { return kind + "(" + format_utc(b.cutoff) + ")"; },
          [&](const policy::ProjectBlocklist& b) {
            return kind + "(" + std::to_string(b.repos.size()) + " repos)";
          },
          [&](const policy::DropOutOfOrder& d) { return kind + "(" + std::string(to_string(d.scope)) + ")"; },
          [&](const policy::MinStars& m) { return kind + "(" + std::to_string(m.min_stars) + ")"; },
          [&](const policy::TopKStars& t) { return kind + "(" + std::to_string(t.k) + ")"; },
      },
      p);
}

void validate(const FilterPolicy& p) {
  if (auto* t = std::get_if<policy::TopKStars>(&p); t && t->k == 0)
    throw PolicyError("TopKStars needs k >= 1");
}

FilterResult filter_min_timestamp(std::vector<CommitRecord> records, std::int64_t min_ts, DateField field) {
  return partition(std::move(records), policy::MinTimestamp{min_ts},
                   [&](const CommitRecord& r) { return r.date(field).epoch_seconds >= min_ts; });
}

FilterResult filter_before_date(std::vector<CommitRecord> records, Timestamp cutoff, DateField field) {
  return partition(std::move(records), policy::BeforeDate{cutoff},
                   [&](const CommitRecord& r) { return !(r.date(field) < cutoff); });
}

FilterResult filter_blocklist(std::vector<CommitRecord> records, const std::set<std::string>& blocklist) {
  return partition(std::move(records), policy::ProjectBlocklist{blocklist},
                   [&](const CommitRecord& r) { return blocklist.count(r.repo_id) == 0; });
}

FilterResult filter_out_of_order(std::vector<CommitRecord> records, policy::Scope scope,
                                 const DetectorConfig& cfg) {
  // Flagged (repo, hash) pairs, found on a deduplicated copy of each repo.
  std::set<std::pair<std::string, std::string>> flagged;
  std::set<std::string> dirty_repos;
  for (auto& repo : split_by_repo(records)) {
    auto graph = CommitGraph::build(deduplicate(std::move(repo)).records);
    for (auto& a : detect_out_of_order_parents(graph, cfg)) {
      dirty_repos.insert(a.repo_id);
      flagged.emplace(std::move(a.repo_id), std::move(a.commit_hash));
    }
  }
  return partition(std::move(records), policy::DropOutOfOrder{scope}, [&](const CommitRecord& r) {
    if (scope == policy::Scope::project) return dirty_repos.count(r.repo_id) == 0;
    return flagged.count({r.repo_id, r.hash}) == 0;
  });
}

std::vector<RepoStars> repo_stars(std::span<const CommitRecord> records, std::size_t* missing) {
  std::map<std::string, std::optional<std::uint64_t>> stars;
  for (const auto& r : records) {
    auto& s = stars[r.repo_id];
    if (r.stars) s = std::max(s.value_or(0), *r.stars);
  }
  std::vector<RepoStars> out;
  std::size_t none = 0;
  for (const auto& [repo, s] : stars) {
    if (!s) ++none;
    out.push_back({repo, s.value_or(0)});
  }
  if (missing) *missing = none;
  return out;
}

FilterResult filter_by_stars(std::vector<CommitRecord> records, std::uint64_t min_stars) {
  std::size_t missing = 0;
  std::map<std::string, std::uint64_t> stars;
  for (auto& rs : repo_stars(records, &missing)) stars.emplace(std::move(rs.repo_id), rs.stars);
  auto result = partition(std::move(records), policy::MinStars{min_stars},
                          [&](const CommitRecord& r) { return stars.at(r.repo_id) >= min_stars; });
  result.ledger.repos_missing_stars = missing;
  return result;
}

std::set<std::string> select_top_k_by_stars(std::span<const RepoStars> repos, std::size_t k) {
  if (k == 0) throw PolicyError("TopKStars needs k >= 1");
  std::vector<RepoStars> sorted(repos.begin(), repos.end());
  std::sort(sorted.begin(), sorted.end(), [](const RepoStars& a, const RepoStars& b) {
    if (a.stars != b.stars) return a.stars > b.stars;
    return a.repo_id < b.repo_id;
  });
  std::set<std::string> out;
  for (const auto& r : sorted) {
    if (out.size() == k) break;
    out.insert(r.repo_id);
  }
  return out;
}

FilterResult filter_top_k_stars(std::vector<CommitRecord> records, std::size_t k) {
  std::size_t missing = 0;
  const auto stars = repo_stars(records, &missing);
  const auto keep = select_top_k_by_stars(stars, k);
  auto result = partition(std::move(records), policy::TopKStars{k},
                          [&](const CommitRecord& r) { return keep.count(r.repo_id) != 0; });
  result.ledger.repos_missing_stars = missing;
  return result;
}

FilterResult apply_policy(std::vector<CommitRecord> records, const FilterPolicy& p, const DetectorConfig& cfg) {
  validate(p);
  return std::visit(
      overloaded{
          [&](const policy::MinTimestamp& m) {
            return filter_min_timestamp(std::move(records), m.min_ts, cfg.date_field);
          },
          [&](const policy::BeforeDate& b) {
            return filter_before_date(std::move(records), b.cutoff, cfg.date_field);
          },
          [&](const policy::ProjectBlocklist& b) { return filter_blocklist(std::move(records), b.repos); },
          [&](const policy::DropOutOfOrder& d) {
            return filter_out_of_order(std::move(records), d.scope, cfg);
          },
          [&](const policy::MinStars& m) { return filter_by_stars(std::move(records), m.min_stars); },
          [&](const policy::TopKStars& t) { return filter_top_k_stars(std::move(records), t.k); },
      },
      p);
}

PipelineResult apply_policies(std::vector<CommitRecord> records, std::span<const FilterPolicy> policies,
                              const DetectorConfig& cfg) {
  PipelineResult out{std::move(records), {}};
  for (const auto& p : policies) {
    auto step = apply_policy(std::move(out.records), p, cfg);
    out.records = std::move(step.records);
    out.ledgers.push_back(std::move(step.ledger));
  }
  return out;
}

namespace {

template <class T>
T get_param(const json& doc, const char* key, std::string_view kind) {
  auto it = doc.find(key);
  if (it == doc.end())
    throw PolicyError(std::string(kind) + " policy is missing '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw PolicyError(std::string(kind) + " policy has a bad '" + key + "'");
  }
}

Timestamp get_instant(const json& doc, const char* key, std::string_view kind) {
  auto it = doc.find(key);
  if (it == doc.end()) throw PolicyError(std::string(kind) + " policy is missing '" + key + "'");
  if (it->is_number_integer()) return Timestamp{it->get<std::int64_t>(), 0};
  if (it->is_string()) {
    if (auto ts = parse_timestamp(it->get<std::string>())) return *ts;
  }
  throw PolicyError(std::string(kind) + " policy: '" + key + "' must be epoch seconds or ISO-8601");
}

FilterPolicy policy_from_json(const json& doc) {
  if (!doc.is_object()) throw PolicyError("policy entries must be objects");
  const auto kind = get_param<std::string>(doc, "kind", "policy");
  FilterPolicy p;
  if (kind == "MinTimestamp") {
    p = policy::MinTimestamp{doc.contains("min_ts") ? get_param<std::int64_t>(doc, "min_ts", kind) : 1};
  } else if (kind == "BeforeDate") {
    p = policy::BeforeDate{get_instant(doc, "cutoff", kind)};
  } else if (kind == "ProjectBlocklist") {
    auto repos = get_param<std::vector<std::string>>(doc, "repos", kind);
    p = policy::ProjectBlocklist{{repos.begin(), repos.end()}};
  } else if (kind == "DropOutOfOrder") {
    const auto scope = doc.contains("scope") ? get_param<std::string>(doc, "scope", kind) : "commit";
    if (scope != "commit" && scope != "project")
      throw PolicyError("DropOutOfOrder scope must be 'commit' or 'project'");
    p = policy::DropOutOfOrder{scope == "commit" ? policy::Scope::commit : policy::Scope::project};
  } else if (kind == "MinStars") {
    const auto min = get_param<std::int64_t>(doc, "min_stars", kind);
    if (min < 0) throw PolicyError("MinStars needs min_stars >= 0");
    p = policy::MinStars{static_cast<std::uint64_t>(min)};
  } else if (kind == "TopKStars") {
    const auto k = get_param<std::int64_t>(doc, "k", kind);
    if (k < 1) throw PolicyError("TopKStars needs k >= 1");
    p = policy::TopKStars{static_cast<std::size_t>(k)};
  } else {
    throw PolicyError("unknown policy kind '" + kind + "'");
  }
  return p;
}

ordered_json policy_to_json(const FilterPolicy& p) {
  ordered_json doc;
  doc["kind"] = policy_kind(p);
  std::visit(overloaded{
                 [&](const policy::MinTimestamp& m) { doc["min_ts"] = m.min_ts; },
                 [&](const policy::BeforeDate& b) { doc["cutoff"] = format_iso8601(b.cutoff); },
                 [&](const policy::ProjectBlocklist& b) { doc["repos"] = b.repos; },
                 [&](const policy::DropOutOfOrder& d) { doc["scope"] = to_string(d.scope); },
                 [&](const policy::MinStars& m) { doc["min_stars"] = m.min_stars; },
                 [&](const policy::TopKStars& t) { doc["k"] = t.k; },
             },
             p);
  return doc;
}

}  // namespace

std::vector<FilterPolicy> parse_policy_document(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw PolicyError("policy document is not valid JSON");
  const json* list = &doc;
  if (doc.is_object()) {
    auto it = doc.find("policies");
    if (it == doc.end()) throw PolicyError("policy document has no 'policies' array");
    list = &*it;
  }
  if (!list->is_array()) throw PolicyError("'policies' must be an array");
  std::vector<FilterPolicy> out;
  for (const auto& entry : *list) out.push_back(policy_from_json(entry));
  return out;
}

std::string policy_document(std::span<const FilterPolicy> policies) {
  ordered_json doc;
  doc["version"] = 1;
  doc["policies"] = ordered_json::array();
  for (const auto& p : policies) doc["policies"].push_back(policy_to_json(p));
  return doc.dump(2);
}

}  // namespace timeaudit
