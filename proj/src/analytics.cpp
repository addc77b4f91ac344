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

#include "timeaudit/analytics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace timeaudit {

namespace {

RankedCounts rank(const std::map<std::string, std::set<std::string>>& groups, std::size_t k) {
  RankedCounts rows;
  rows.reserve(groups.size());
  for (const auto& [id, hashes] : groups) rows.emplace_back(id, hashes.size());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (rows.size() > k) rows.resize(k);
  return rows;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) { return std::any_of(s.begin(), s.end(), is_vowel); }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_token_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

AnomalySummary summarize(std::span<const Anomaly> anomalies) {
  std::map<AnomalyKind, std::pair<std::set<std::string_view>, std::set<std::string_view>>> groups;
  std::set<std::string_view> all_commits;
  std::set<std::string_view> all_repos;
  for (const auto& a : anomalies) {
    auto& [commits, repos] = groups[a.kind];
    commits.insert(a.commit_hash);
    repos.insert(a.repo_id);
    all_commits.insert(a.commit_hash);
    all_repos.insert(a.repo_id);
  }
  AnomalySummary out;
  for (AnomalyKind kind : kAllAnomalyKinds) {
    auto it = groups.find(kind);
    out.per_kind[kind] =
        it == groups.end() ? KindCount{} : KindCount{it->second.first.size(), it->second.second.size()};
  }
  out.total = {all_commits.size(), all_repos.size()};
  return out;
}

double quantile(std::span<const double> sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

DeltaStats delta_statistics(std::span<const std::int64_t> deltas) {
  if (deltas.empty()) throw EmptyInput("delta_statistics");
  std::vector<double> v(deltas.begin(), deltas.end());
  std::sort(v.begin(), v.end());

  DeltaStats s;
  s.n = v.size();
  const double n = static_cast<double>(s.n);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / n);
  s.min = v.front();
  s.max = v.back();
  s.p25 = quantile(v, 0.25);
  s.p50 = quantile(v, 0.50);
  s.p75 = quantile(v, 0.75);
  return s;
}

std::size_t DeltaHistogram::total() const {
  std::size_t sum = 0;
  for (const auto& b : buckets) sum += b.count;
  return sum;
}

std::size_t histogram_bucket(std::int64_t delta) {
  auto it = std::lower_bound(kHistogramBounds.begin(), kHistogramBounds.end(), delta);
  return static_cast<std::size_t>(it - kHistogramBounds.begin());
}

DeltaHistogram delta_histogram(std::span<const std::int64_t> deltas) {
  if (deltas.empty()) throw EmptyInput("delta_histogram");
  DeltaHistogram h;
  for (std::size_t i = 0; i < kHistogramBuckets; ++i) {
    h.buckets[i].label = kHistogramLabels[i];
    if (i < kHistogramBounds.size()) h.buckets[i].upper_bound = kHistogramBounds[i];
  }
  for (auto d : deltas) ++h.buckets[histogram_bucket(d)].count;
  return h;
}

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
      "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
      "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
      "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
      "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
      "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
      "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
      "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
      "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
      "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
      "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
      "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
      "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
      "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
      "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't",
      "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn",
      "wouldn't",
  };
  return words;
}

std::string stem(std::string_view word) {
  if (word.empty() || !std::all_of(word.begin(), word.end(), [](unsigned char c) {
        return c >= 'a' && c <= 'z';
      }))
    return std::string(word);

  std::string w(word);
  auto strip = [&](std::string_view suffix) { w.resize(w.size() - suffix.size()); };
  auto rest = [&](std::string_view suffix) { return std::string_view(w).substr(0, w.size() - suffix.size()); };

  if (ends_with(w, "ing") && rest("ing").size() >= 3 && has_vowel(rest("ing"))) {
    strip("ing");
  } else if (ends_with(w, "ed") && rest("ed").size() >= 3 && has_vowel(rest("ed"))) {
    strip("ed");
  } else if (ends_with(w, "es") && rest("es").size() >= 3) {
    strip("es");
  } else if (ends_with(w, "s") && !ends_with(w, "ss") && rest("s").size() >= 3) {
    strip("s");
  }

  if (w.size() >= 3 && w.back() == 'y' && !is_vowel(w[w.size() - 2])) w.back() = 'i';
  return w;
}

std::vector<std::string> tokenize(std::string_view message) {
  std::vector<std::string> out;
  const std::string lowered = to_lower(message);
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && !is_token_char(static_cast<unsigned char>(lowered[i]))) ++i;
    std::size_t j = i;
    while (j < lowered.size() && is_token_char(static_cast<unsigned char>(lowered[j]))) ++j;
    if (j > i) {
      std::string_view token(lowered.data() + i, j - i);
      if (!stopwords().contains(token)) out.push_back(stem(token));
    }
    i = j;
  }
  return out;
}

TokenTable token_frequency(std::span<const std::string> messages, const std::set<std::string>& exclude_terms,
                           std::size_t limit) {
  std::vector<std::string> lowered_terms;
  for (const auto& t : exclude_terms) lowered_terms.push_back(to_lower(t));

  std::map<std::string, std::size_t> counts;
  for (const auto& m : messages) {
    const std::string lowered = to_lower(m);
    const bool excluded = std::any_of(lowered_terms.begin(), lowered_terms.end(), [&](const auto& t) {
      return lowered.find(t) != std::string::npos;
    });
    if (excluded) continue;
    for (auto& token : tokenize(m)) ++counts[std::move(token)];
  }

  TokenTable table;
  table.reserve(counts.size());
  for (auto& [token, n] : counts) table.push_back({token, n});
  std::stable_sort(table.begin(), table.end(),
                   [](const TokenCount& a, const TokenCount& b) { return a.count > b.count; });
  if (limit != 0 && table.size() > limit) table.resize(limit);
  return table;
}

RankedCounts top_committers(std::span<const Anomaly> anomalies, std::span<const CommitRecord> records,
                            std::size_t k) {
  std::unordered_map<std::string_view, std::string_view> committer_of;
  for (const auto& r : records) committer_of.emplace(r.hash, r.committer_id);

  std::map<std::string, std::set<std::string>> groups;
  for (const auto& a : anomalies) {
    auto it = committer_of.find(a.commit_hash);
    if (it == committer_of.end()) continue;
    groups[canonical_committer(it->second)].insert(a.commit_hash);
  }
  return rank(groups, k);
}

RankedCounts top_projects(std::span<const Anomaly> anomalies, std::size_t k) {
  std::map<std::string, std::set<std::string>> groups;
  for (const auto& a : anomalies) groups[a.repo_id].insert(a.commit_hash);
  return rank(groups, k);
}

std::string canonical_repo_id(std::string_view repo) {
  std::string id = to_lower(repo);
  while (!id.empty() && id.back() == '/') id.pop_back();
  if (ends_with(id, ".git")) id.resize(id.size() - 4);
  return id;
}

ProjectIntersection intersect_projects(std::span<const std::string> a, std::span<const std::string> b) {
  std::set<std::string> left;
  std::set<std::string> right;
  for (const auto& x : a) left.insert(canonical_repo_id(x));
  for (const auto& y : b) right.insert(canonical_repo_id(y));
  ProjectIntersection out{left.size(), right.size(), {}};
  std::set_intersection(left.begin(), left.end(), right.begin(), right.end(),
                        std::inserter(out.common, out.common.end()));
  return out;
}

}  // namespace timeaudit
