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

#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "timeaudit/detectors.hpp"
#include "timeaudit/model.hpp"

namespace timeaudit {

namespace policy {

/// Drop commits whose date is below `min_ts` (default: anything <= 0).
struct MinTimestamp {
  std::int64_t min_ts = 1;
};

/// Drop commits dated strictly before `cutoff`.
struct BeforeDate {
  Timestamp cutoff;
};

struct ProjectBlocklist {
  std::set<std::string> repos;
};

enum class Scope { commit, project };

/// Drop out-of-order commits, or whole projects that contain any.
struct DropOutOfOrder {
  Scope scope = Scope::commit;
};

/// Keep repositories with at least `min_stars` stars (missing counts as 0).
struct MinStars {
  std::uint64_t min_stars = 0;
};

struct TopKStars {
  std::size_t k = 1;
};

}  // namespace policy

using FilterPolicy = std::variant<policy::MinTimestamp, policy::BeforeDate, policy::ProjectBlocklist,
                                  policy::DropOutOfOrder, policy::MinStars, policy::TopKStars>;

class PolicyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string_view policy_kind(const FilterPolicy& p);
/// One-line human-readable form, e.g. "BeforeDate(2014-01-01 00:00:00 UTC)".
std::string describe(const FilterPolicy& p);
/// Throws PolicyError for k == 0.
void validate(const FilterPolicy& p);
std::string_view to_string(policy::Scope scope);

struct RemovalLedger {
  FilterPolicy policy;
  std::size_t input_commits = 0;
  std::size_t removed_commits = 0;
  std::size_t retained_commits = 0;
  /// Repositories present in the input with no commit retained.
  std::size_t removed_projects = 0;
  /// Repositories whose star count was missing and read as 0.
  std::size_t repos_missing_stars = 0;

  bool balanced() const { return removed_commits + retained_commits == input_commits; }
};

struct FilterResult {
  std::vector<CommitRecord> records;
  RemovalLedger ledger;
};

FilterResult filter_min_timestamp(std::vector<CommitRecord> records, std::int64_t min_ts = 1,
                                  DateField field = DateField::committer);

FilterResult filter_before_date(std::vector<CommitRecord> records, Timestamp cutoff,
                                DateField field = DateField::committer);

FilterResult filter_blocklist(std::vector<CommitRecord> records, const std::set<std::string>& blocklist);

/// Recomputes parent-edge anomalies per repository with `cfg`, then drops
/// the flagged commits (scope commit) or their whole repositories (scope
/// project). Throws CycleDetected on a corrupt repository.
FilterResult filter_out_of_order(std::vector<CommitRecord> records, policy::Scope scope,
                                 const DetectorConfig& cfg = {});

FilterResult filter_by_stars(std::vector<CommitRecord> records, std::uint64_t min_stars);

struct RepoStars {
  std::string repo_id;
  std::uint64_t stars = 0;
};

/// The k repositories with most stars; ties by repo id ascending.
/// Throws PolicyError for k == 0.
std::set<std::string> select_top_k_by_stars(std::span<const RepoStars> repos, std::size_t k);

/// Star count per repository (largest value seen on its records; missing is
/// 0), ordered by repo id. `missing` receives the count of repos with none.
std::vector<RepoStars> repo_stars(std::span<const CommitRecord> records, std::size_t* missing = nullptr);

FilterResult filter_top_k_stars(std::vector<CommitRecord> records, std::size_t k);

FilterResult apply_policy(std::vector<CommitRecord> records, const FilterPolicy& policy,
                          const DetectorConfig& cfg = {});

struct PipelineResult {
  std::vector<CommitRecord> records;
  std::vector<RemovalLedger> ledgers;
};

/// Applies the policies in order; one ledger per policy.
PipelineResult apply_policies(std::vector<CommitRecord> records, std::span<const FilterPolicy> policies,
                              const DetectorConfig& cfg = {});

/// Reads a policy document (see README). Throws PolicyError on unknown kinds
/// or bad parameters.
std::vector<FilterPolicy> parse_policy_document(std::string_view text);
std::string policy_document(std::span<const FilterPolicy> policies);

}  // namespace timeaudit
