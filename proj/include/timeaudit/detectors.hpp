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

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "timeaudit/commit_graph.hpp"
#include "timeaudit/model.hpp"

namespace timeaudit {

/// Release instant of CVS 1.0, 1990-11-19T00:00:00Z. Nothing in a Git or
/// Subversion history can legitimately predate it.
inline constexpr std::int64_t kCvsReleaseEpoch = 658972800;

struct DetectorConfig {
  Timestamp old_cutoff{kCvsReleaseEpoch, 0};
  /// Dataset snapshot instant; required by detect_future.
  std::optional<Timestamp> future_cutoff;
  bool exclude_merges = true;
  DateField date_field = DateField::committer;

  /// Throws std::invalid_argument unless old_cutoff < future_cutoff.
  void validate() const;
};

class MissingSnapshotDate : public std::runtime_error {
 public:
  MissingSnapshotDate()
      : std::runtime_error("future detector needs a dataset snapshot date") {}
};

std::vector<Anomaly> detect_old(std::span<const CommitRecord> records, const DetectorConfig& cfg);

/// Throws MissingSnapshotDate when cfg.future_cutoff is unset.
std::vector<Anomaly> detect_future(std::span<const CommitRecord> records, const DetectorConfig& cfg);

/// Substring test for "merge" on the lowercased message. "submerged"
/// matches too; that is the query's behaviour and it is kept.
bool is_merge_message(std::string_view message);

/// Walks one repository's commits in the given (topological) order and
/// flags each commit dated strictly before its predecessor in the walk.
std::vector<Anomaly> detect_out_of_order_linear(std::span<const CommitRecord> ordered,
                                                const DetectorConfig& cfg);

/// Flags each commit with at least one resolved parent dated strictly after
/// it. One anomaly per child; delta is the largest offending gap.
std::vector<Anomaly> detect_out_of_order_parents(const CommitGraph& graph, const DetectorConfig& cfg);

/// Markers left in commit messages by migration and review tooling.
enum class ToolSignature { GitSvnId, ChangeId, ReviewedBy, RebaseSource, Hg, Moe };

inline constexpr ToolSignature kAllToolSignatures[] = {
    ToolSignature::GitSvnId,     ToolSignature::ChangeId, ToolSignature::ReviewedBy,
    ToolSignature::RebaseSource, ToolSignature::Hg,       ToolSignature::Moe,
};

std::string_view to_string(ToolSignature sig);

/// Signatures present in one message, in kAllToolSignatures order.
std::vector<ToolSignature> match_tool_signatures(std::string_view message);

std::vector<Anomaly> detect_tool_signatures(std::span<const CommitRecord> records);

/// Edges where a forge-verified child predates an unverified parent: the
/// forge's clock and the user's clock disagree. One anomaly per edge.
std::vector<Anomaly> detect_verified_mismatch(const CommitGraph& graph,
                                              const DetectorConfig& cfg = {});

/// Hashes present in both lists, unique and sorted.
std::vector<std::string> intersect_anomalies(std::span<const Anomaly> a, std::span<const Anomaly> b);

}  // namespace timeaudit
