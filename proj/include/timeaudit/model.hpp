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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "timeaudit/timestamp.hpp"

namespace timeaudit {

enum class Verified { unknown, yes, no };

/// Which of the two Git timestamps an operation reads.
enum class DateField { committer, author };

/// Committer identity used when an export carries none.
inline constexpr std::string_view kNoName = "(no name)";

struct CommitRecord {
  std::string hash;
  std::string repo_id;
  std::vector<std::string> parents;
  Timestamp author_date;
  Timestamp committer_date;
  std::string author_id;
  std::string committer_id{kNoName};
  std::string message;
  Verified verified = Verified::unknown;
  std::optional<std::uint64_t> stars;

  const Timestamp& date(DateField field) const {
    return field == DateField::committer ? committer_date : author_date;
  }
};

enum class AnomalyKind {
  Old,
  Future,
  OutOfOrderLinear,
  OutOfOrderParent,
  ToolSignature,
  VerifiedMismatch,
};

inline constexpr AnomalyKind kAllAnomalyKinds[] = {
    AnomalyKind::Old,           AnomalyKind::Future,        AnomalyKind::OutOfOrderLinear,
    AnomalyKind::OutOfOrderParent, AnomalyKind::ToolSignature, AnomalyKind::VerifiedMismatch,
};

constexpr bool is_out_of_order(AnomalyKind kind) {
  return kind == AnomalyKind::OutOfOrderLinear || kind == AnomalyKind::OutOfOrderParent;
}

/// Kinds that mark the commit's time data as bad (as opposed to evidence
/// about a likely cause).
constexpr bool is_time_anomaly(AnomalyKind kind) {
  return kind == AnomalyKind::Old || kind == AnomalyKind::Future || is_out_of_order(kind);
}

struct Anomaly {
  AnomalyKind kind = AnomalyKind::Old;
  std::string commit_hash;
  std::string repo_id;
  std::string evidence;
  /// Parent minus child seconds; set for the out-of-order kinds only.
  std::optional<std::int64_t> delta_seconds;

  friend bool operator==(const Anomaly&, const Anomaly&) = default;
};

/// Canonical ordering used for every anomaly list that leaves the library:
/// repo, then commit hash, then kind, then evidence.
bool anomaly_less(const Anomaly& a, const Anomaly& b);
void sort_anomalies(std::vector<Anomaly>& anomalies);

struct DatasetManifest {
  std::string name;
  Timestamp snapshot_date;
  std::vector<std::string> repos;

  /// Throws std::invalid_argument on a non-positive snapshot date or
  /// repeated repo ids.
  void validate() const;
};

std::string_view to_string(AnomalyKind kind);
std::optional<AnomalyKind> parse_anomaly_kind(std::string_view text);
std::string_view to_string(Verified v);
std::string_view to_string(DateField f);
std::optional<DateField> parse_date_field(std::string_view text);

/// Trims surrounding whitespace; blank identities become "(no name)".
std::string canonical_committer(std::string_view raw);

/// True for a 40-character hexadecimal object id (either case).
bool is_hex_object_id(std::string_view s);

/// True for the Subversion revision mangling "r<N>@<repo>".
bool is_svn_revision_id(std::string_view s);

std::string to_lower(std::string_view s);

}  // namespace timeaudit
