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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "timeaudit/model.hpp"

namespace timeaudit {

class EmptyInput : public std::invalid_argument {
 public:
  explicit EmptyInput(const std::string& what) : std::invalid_argument(what + ": empty input") {}
};

struct KindCount {
  std::size_t commits = 0;
  std::size_t projects = 0;

  friend bool operator==(const KindCount&, const KindCount&) = default;
};

struct AnomalySummary {
  std::map<AnomalyKind, KindCount> per_kind;  // every kind present, zeros included
  /// Distinct commits / projects over all kinds.
  KindCount total;
};

AnomalySummary summarize(std::span<const Anomaly> anomalies);

struct DeltaStats {
  std::size_t n = 0;
  double mean = 0;
  double std = 0;  // population
  double min = 0;
  double p25 = 0;
  double p50 = 0;
  double p75 = 0;
  double max = 0;
};

/// Linear interpolation between closest ranks, q in [0, 1].
/// `sorted` must be ascending and non-empty.
double quantile(std::span<const double> sorted, double q);

/// Throws EmptyInput.
DeltaStats delta_statistics(std::span<const std::int64_t> deltas);

inline constexpr std::size_t kHistogramBuckets = 11;

/// Inclusive upper bounds in seconds; the last bucket is open-ended.
/// A month is 30 days and a year 365 days.
inline constexpr std::array<std::int64_t, kHistogramBuckets - 1> kHistogramBounds = {
    30, 60, 300, 1800, 3600, 21600, 86400, 604800, 2592000, 31536000,
};

inline constexpr std::array<std::string_view, kHistogramBuckets> kHistogramLabels = {
    "<=30s", "<=1m", "<=5m", "<=30m", "<=1h", "<=6h", "<=1d", "<=1w", "<=30d", "<=1y", ">1y",
};

struct HistogramBucket {
  std::optional<std::int64_t> upper_bound;  // nullopt: unbounded
  std::string_view label;
  std::size_t count = 0;
};

struct DeltaHistogram {
  std::array<HistogramBucket, kHistogramBuckets> buckets;

  std::size_t total() const;
};

std::size_t histogram_bucket(std::int64_t delta);

/// Throws EmptyInput.
DeltaHistogram delta_histogram(std::span<const std::int64_t> deltas);

struct TokenCount {
  std::string token;
  std::size_t count = 0;

  friend bool operator==(const TokenCount&, const TokenCount&) = default;
};

/// Sorted by count descending, then token ascending.
using TokenTable = std::vector<TokenCount>;

/// Embedded English stopword list (lowercase).
const std::set<std::string, std::less<>>& stopwords();

/// Suffix-stripping stemmer for lowercase ASCII-alphabetic tokens. The first
/// suffix rule whose condition holds is applied:
///   -ing  dropped when at least 3 characters remain and they contain a vowel
///   -ed   dropped under the same condition
///   -es   dropped when at least 3 characters remain
///   -s    dropped when at least 3 characters remain and the word is not -ss
/// then a final -y preceded by a consonant is folded to -i when at least 2
/// characters precede it. Other tokens pass through unchanged.
std::string stem(std::string_view word);

/// Lowercases, splits on non-alphanumerics, drops stopwords, stems.
std::vector<std::string> tokenize(std::string_view message);

/// Messages containing any exclude term (case-insensitive) are skipped
/// entirely. `limit` of 0 keeps every row.
TokenTable token_frequency(std::span<const std::string> messages,
                           const std::set<std::string>& exclude_terms = {}, std::size_t limit = 0);

using RankedCounts = std::vector<std::pair<std::string, std::size_t>>;

/// Distinct anomalous commits per committer; blank and "(no name)"
/// identities share one row. Anomalies whose commit is absent from
/// `records` are skipped.
RankedCounts top_committers(std::span<const Anomaly> anomalies, std::span<const CommitRecord> records,
                            std::size_t k = 20);

/// Distinct anomalous commits per repository.
RankedCounts top_projects(std::span<const Anomaly> anomalies, std::size_t k = 20);

/// Lowercase owner/name with a trailing ".git" or "/" removed.
std::string canonical_repo_id(std::string_view repo);

struct ProjectIntersection {
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  std::set<std::string> common;
};

ProjectIntersection intersect_projects(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace timeaudit
