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

#include "timeaudit/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace timeaudit {

namespace {

bool merge_excluded(const DetectorConfig& cfg, const CommitRecord& a, const CommitRecord& b) {
  return cfg.exclude_merges && (is_merge_message(a.message) || is_merge_message(b.message));
}

std::string ooo_evidence(const CommitRecord& child, const CommitRecord& other, DateField field,
                         std::string_view relation) {
  return std::string(relation) + " " + other.hash + " at " + format_utc(other.date(field)) +
         " is newer than " + format_utc(child.date(field));
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Case-insensitive whole-word search; `word` must be lowercase.
bool contains_word(std::string_view lowered, std::string_view word) {
  for (std::size_t pos = lowered.find(word); pos != std::string_view::npos;
       pos = lowered.find(word, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right_ok = end == lowered.size() || !is_word_char(lowered[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace

void DetectorConfig::validate() const {
  if (future_cutoff && !(old_cutoff < *future_cutoff))
    throw std::invalid_argument("old cutoff " + format_utc(old_cutoff) +
                                " must precede the snapshot date " + format_utc(*future_cutoff));
}

std::vector<Anomaly> detect_old(std::span<const CommitRecord> records, const DetectorConfig& cfg) {
  std::vector<Anomaly> out;
  for (const auto& r : records) {
    const Timestamp& ts = r.date(cfg.date_field);
    if (ts < cfg.old_cutoff)
      out.push_back({AnomalyKind::Old, r.hash, r.repo_id,
                     std::string(to_string(cfg.date_field)) + " date " + format_utc(ts) +
                         " precedes " + format_utc(cfg.old_cutoff),
                     std::nullopt});
  }
  return out;
}

std::vector<Anomaly> detect_future(std::span<const CommitRecord> records, const DetectorConfig& cfg) {
  if (!cfg.future_cutoff) throw MissingSnapshotDate();
  std::vector<Anomaly> out;
  for (const auto& r : records) {
    const Timestamp& ts = r.date(cfg.date_field);
    if (ts > *cfg.future_cutoff)
      out.push_back({AnomalyKind::Future, r.hash, r.repo_id,
                     std::string(to_string(cfg.date_field)) + " date " + format_utc(ts) +
                         " is after snapshot " + format_utc(*cfg.future_cutoff),
                     std::nullopt});
  }
  return out;
}

bool is_merge_message(std::string_view message) {
  return to_lower(message).find("merge") != std::string::npos;
}

std::vector<Anomaly> detect_out_of_order_linear(std::span<const CommitRecord> ordered,
                                                const DetectorConfig& cfg) {
  std::vector<Anomaly> out;
  const CommitRecord* previous = nullptr;
  for (const auto& r : ordered) {
    if (previous != nullptr && r.date(cfg.date_field) < previous->date(cfg.date_field) &&
        !merge_excluded(cfg, r, *previous)) {
      out.push_back({AnomalyKind::OutOfOrderLinear, r.hash, r.repo_id,
                     ooo_evidence(r, *previous, cfg.date_field, "previous commit"),
                     previous->date(cfg.date_field).epoch_seconds -
                         r.date(cfg.date_field).epoch_seconds});
    }
    previous = &r;
  }
  return out;
}

std::vector<Anomaly> detect_out_of_order_parents(const CommitGraph& graph, const DetectorConfig& cfg) {
  std::vector<Anomaly> out;
  for (auto c : graph.topological_indices()) {
    const auto& child = graph.node(c);
    const CommitRecord* worst = nullptr;
    std::int64_t worst_delta = 0;
    for (auto p : graph.parents(c)) {
      const auto& parent = graph.node(p);
      const std::int64_t delta =
          parent.date(cfg.date_field).epoch_seconds - child.date(cfg.date_field).epoch_seconds;
      if (delta <= 0 || merge_excluded(cfg, child, parent)) continue;
      if (worst == nullptr || delta > worst_delta) {
        worst = &parent;
        worst_delta = delta;
      }
    }
    if (worst != nullptr)
      out.push_back({AnomalyKind::OutOfOrderParent, child.hash, child.repo_id,
                     ooo_evidence(child, *worst, cfg.date_field, "parent"), worst_delta});
  }
  return out;
}

std::string_view to_string(ToolSignature sig) {
  switch (sig) {
    case ToolSignature::GitSvnId: return "git-svn-id";
    case ToolSignature::ChangeId: return "Change-Id";
    case ToolSignature::ReviewedBy: return "Reviewed-by";
    case ToolSignature::RebaseSource: return "rebase_source";
    case ToolSignature::Hg: return "hg";
    case ToolSignature::Moe: return "MOE";
  }
  return "?";
}

std::vector<ToolSignature> match_tool_signatures(std::string_view message) {
  std::vector<ToolSignature> found;
  const std::string lowered = to_lower(message);
  for (ToolSignature sig : kAllToolSignatures) {
    bool hit = false;
    switch (sig) {
      case ToolSignature::GitSvnId:
      case ToolSignature::ChangeId:
      case ToolSignature::ReviewedBy:
      case ToolSignature::RebaseSource:
        hit = message.find(std::string(to_string(sig)) + ":") != std::string_view::npos;
        break;
      case ToolSignature::Hg:
      case ToolSignature::Moe:
        hit = contains_word(lowered, to_lower(to_string(sig)));
        break;
    }
    if (hit) found.push_back(sig);
  }
  return found;
}

std::vector<Anomaly> detect_tool_signatures(std::span<const CommitRecord> records) {
  std::vector<Anomaly> out;
  for (const auto& r : records) {
    for (ToolSignature sig : match_tool_signatures(r.message))
      out.push_back({AnomalyKind::ToolSignature, r.hash, r.repo_id,
                     "signature " + std::string(to_string(sig)), std::nullopt});
  }
  return out;
}

std::vector<Anomaly> detect_verified_mismatch(const CommitGraph& graph, const DetectorConfig& cfg) {
  std::vector<Anomaly> out;
  for (auto c : graph.topological_indices()) {
    const auto& child = graph.node(c);
    if (child.verified != Verified::yes) continue;
    for (auto p : graph.parents(c)) {
      const auto& parent = graph.node(p);
      if (parent.verified != Verified::no) continue;
      if (parent.date(cfg.date_field) > child.date(cfg.date_field))
        out.push_back({AnomalyKind::VerifiedMismatch, child.hash, child.repo_id,
                       "verified commit predates unverified " +
                           ooo_evidence(child, parent, cfg.date_field, "parent"),
                       std::nullopt});
    }
  }
  return out;
}

std::vector<std::string> intersect_anomalies(std::span<const Anomaly> a, std::span<const Anomaly> b) {
  std::set<std::string_view> left;
  for (const auto& x : a) left.insert(x.commit_hash);
  std::set<std::string> both;
  for (const auto& y : b)
    if (left.count(y.commit_hash)) both.insert(y.commit_hash);
  return {both.begin(), both.end()};
}

}  // namespace timeaudit
