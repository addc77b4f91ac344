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

#include "timeaudit/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

namespace timeaudit {

bool anomaly_less(const Anomaly& a, const Anomaly& b) {
  return std::tie(a.repo_id, a.commit_hash, a.kind, a.evidence, a.delta_seconds) <
         std::tie(b.repo_id, b.commit_hash, b.kind, b.evidence, b.delta_seconds);
}

void sort_anomalies(std::vector<Anomaly>& anomalies) {
  std::sort(anomalies.begin(), anomalies.end(), anomaly_less);
}

void DatasetManifest::validate() const {
  if (snapshot_date.epoch_seconds <= 0)
    throw std::invalid_argument("manifest '" + name + "': snapshot_date must be positive");
  std::set<std::string_view> seen;
  for (const auto& repo : repos) {
    if (!seen.insert(repo).second)
      throw std::invalid_argument("manifest '" + name + "': duplicate repo id '" + repo + "'");
  }
}

std::string_view to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::Old: return "Old";
    case AnomalyKind::Future: return "Future";
    case AnomalyKind::OutOfOrderLinear: return "OutOfOrderLinear";
    case AnomalyKind::OutOfOrderParent: return "OutOfOrderParent";
    case AnomalyKind::ToolSignature: return "ToolSignature";
    case AnomalyKind::VerifiedMismatch: return "VerifiedMismatch";
  }
  return "?";
}

std::optional<AnomalyKind> parse_anomaly_kind(std::string_view text) {
  for (AnomalyKind k : kAllAnomalyKinds)
    if (to_string(k) == text) return k;
  return std::nullopt;
}

std::string_view to_string(Verified v) {
  switch (v) {
    case Verified::yes: return "true";
    case Verified::no: return "false";
    case Verified::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(DateField f) {
  return f == DateField::committer ? "committer" : "author";
}

std::optional<DateField> parse_date_field(std::string_view text) {
  if (text == "committer") return DateField::committer;
  if (text == "author") return DateField::author;
  return std::nullopt;
}

std::string canonical_committer(std::string_view raw) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!raw.empty() && is_space(raw.front())) raw.remove_prefix(1);
  while (!raw.empty() && is_space(raw.back())) raw.remove_suffix(1);
  if (raw.empty()) return std::string(kNoName);
  return std::string(raw);
}

bool is_hex_object_id(std::string_view s) {
  return s.size() == 40 &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c) != 0; });
}

bool is_svn_revision_id(std::string_view s) {
  if (s.size() < 4 || s[0] != 'r') return false;
  const auto at = s.find('@');
  if (at == std::string_view::npos || at < 2 || at + 1 >= s.size()) return false;
  return std::all_of(s.begin() + 1, s.begin() + static_cast<std::ptrdiff_t>(at),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace timeaudit
