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

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "timeaudit/analytics.hpp"

using namespace timeaudit;

namespace {

double sorted_median(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? static_cast<double>(v[n / 2])
               : (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
}

std::size_t bucket_by_scan(std::int64_t d) {
  const std::int64_t bounds[] = {30, 60, 300, 1800, 3600, 21600, 86400, 604800, 2592000, 31536000};
  for (std::size_t i = 0; i < 10; ++i)
    if (d <= bounds[i]) return i;
  return 10;
}

Anomaly anomaly(AnomalyKind kind, std::string hash, std::string repo) {
  return {kind, std::move(hash), std::move(repo), "", is_out_of_order(kind) ? std::optional<std::int64_t>(1) : std::nullopt};
}

}  // namespace

TEST_SUITE("analytics") {
  TEST_CASE("median and quartiles against sort-based oracles") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> n(1, 200);
    std::uniform_int_distribution<std::int64_t> d(1, 400'000'000);
    for (int round = 0; round < 500; ++round) {
      std::vector<std::int64_t> v(n(rng));
      for (auto& x : v) x = d(rng);
      auto s = delta_statistics(v);
      CHECK(s.p50 == doctest::Approx(sorted_median(v)).epsilon(1e-12));
      auto sorted = v;
      std::sort(sorted.begin(), sorted.end());
      CHECK(s.min == static_cast<double>(sorted.front()));
      CHECK(s.max == static_cast<double>(sorted.back()));
      long double sum = 0, ss = 0;
      for (auto x : v) sum += x;
      const long double mean = sum / v.size();
      for (auto x : v) ss += (x - mean) * (x - mean);
      CHECK(s.mean == doctest::Approx(static_cast<double>(mean)).epsilon(1e-12));
      CHECK(s.std == doctest::Approx(static_cast<double>(std::sqrt(ss / v.size()))).epsilon(1e-9));
    }
  }

  TEST_CASE("quantile interpolates like numpy's default") {
    const std::vector<double> v = {1, 2, 3, 4};
    CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(v, 0.75) == doctest::Approx(3.25));
    CHECK(quantile(v, 0.0) == 1);
    CHECK(quantile(v, 1.0) == 4);
    const std::vector<double> one = {7};
    CHECK(quantile(one, 0.3) == 7);
  }

  TEST_CASE("histogram buckets are inclusive upper bounds") {
    CHECK(histogram_bucket(1) == 0);
    CHECK(histogram_bucket(30) == 0);
    CHECK(histogram_bucket(31) == 1);
    CHECK(histogram_bucket(86400) == 6);
    CHECK(histogram_bucket(31536000) == 9);
    CHECK(histogram_bucket(31536001) == 10);
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::int64_t> d(1, 100'000'000);
    std::vector<std::int64_t> v(3000);
    for (auto& x : v) x = d(rng);
    auto h = delta_histogram(v);
    CHECK(h.total() == v.size());
    std::size_t counts[11] = {};
    for (auto x : v) ++counts[bucket_by_scan(x)];
    for (std::size_t i = 0; i < 11; ++i) CHECK(h.buckets[i].count == counts[i]);
    CHECK_FALSE(h.buckets[10].upper_bound.has_value());
    CHECK(h.buckets[10].label == ">1y");
  }

  TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS(delta_statistics({}), EmptyInput);
    CHECK_THROWS_AS(delta_histogram({}), EmptyInput);
  }

  TEST_CASE("summary counts distinct commits and projects per kind") {
    std::vector<Anomaly> a = {anomaly(AnomalyKind::Old, "h1", "r1"), anomaly(AnomalyKind::Old, "h1", "r1"),
                              anomaly(AnomalyKind::Old, "h2", "r2"),
                              anomaly(AnomalyKind::ToolSignature, "h1", "r1"),
                              anomaly(AnomalyKind::ToolSignature, "h1", "r1"),
                              anomaly(AnomalyKind::OutOfOrderParent, "h3", "r1")};
    auto s = summarize(a);
    CHECK(s.per_kind.size() == std::size(kAllAnomalyKinds));
    CHECK(s.per_kind[AnomalyKind::Old] == KindCount{2, 2});
    CHECK(s.per_kind[AnomalyKind::ToolSignature] == KindCount{1, 1});
    CHECK(s.per_kind[AnomalyKind::Future] == KindCount{0, 0});
    CHECK(s.total == KindCount{3, 2});
  }

  TEST_CASE("stemmer rules") {
    CHECK(stem("fixed") == "fix");
    CHECK(stem("adding") == "add");
    CHECK(stem("sing") == "sing");
    CHECK(stem("red") == "red");
    CHECK(stem("files") == "fil");
    CHECK(stem("bugs") == "bug");
    CHECK(stem("class") == "class");
    CHECK(stem("gas") == "gas");
    CHECK(stem("copy") == "copi");
    CHECK(stem("copies") == "copi");
    CHECK(stem("day") == "day");
    CHECK(stem("by") == "by");
    CHECK(stem("v2") == "v2");
  }

  TEST_CASE("tokenize drops stopwords and stems") {
    CHECK(tokenize("Fixed the bugs in THE parser, again!") == std::vector<std::string>{"fix", "bug", "parser"});
    CHECK(tokenize("don't") == std::vector<std::string>{});
    CHECK(tokenize("git-svn-id: r12") == std::vector<std::string>{"git", "svn", "id", "r12"});
  }

  TEST_CASE("token frequency with exclusions") {
    std::vector<std::string> messages = {"Fix build", "fix tests", "Fixes build\ngit-svn-id: x", "Update README"};
    auto all = token_frequency(messages);
    REQUIRE(all.size() == 9);
    CHECK(all[0] == TokenCount{"fix", 3});
    CHECK(all[1] == TokenCount{"build", 2});
    auto filtered = token_frequency(messages, {"GIT-SVN-ID"}, 2);
    REQUIRE(filtered.size() == 2);
    CHECK(filtered[0] == TokenCount{"fix", 2});
    CHECK(filtered[1] == TokenCount{"build", 1});
  }

  TEST_CASE("top committers and projects") {
    std::vector<CommitRecord> records(4);
    const char* who[] = {"ann", "", "(no name)", "bob"};
    for (int i = 0; i < 4; ++i) {
      records[i].hash = "h" + std::to_string(i);
      records[i].committer_id = who[i];
    }
    std::vector<Anomaly> a = {anomaly(AnomalyKind::Old, "h0", "z/z"), anomaly(AnomalyKind::OutOfOrderParent, "h0", "z/z"),
                              anomaly(AnomalyKind::Old, "h1", "a/a"), anomaly(AnomalyKind::Old, "h2", "a/a"),
                              anomaly(AnomalyKind::Old, "h3", "b/b"), anomaly(AnomalyKind::Old, "ghost", "b/b")};
    auto c = top_committers(a, records, 20);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == std::pair<std::string, std::size_t>{"(no name)", 2});
    CHECK(c[1] == std::pair<std::string, std::size_t>{"ann", 1});
    CHECK(c[2] == std::pair<std::string, std::size_t>{"bob", 1});
    auto p = top_projects(a, 2);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == std::pair<std::string, std::size_t>{"a/a", 2});
    CHECK(p[1] == std::pair<std::string, std::size_t>{"b/b", 2});
  }

  TEST_CASE("project intersection uses canonical ids") {
    CHECK(canonical_repo_id("Apache/Ant.git/") == "apache/ant");
    std::vector<std::string> a = {"Apache/Ant", "x/y", "x/y.git"};
    std::vector<std::string> b = {"apache/ant.git", "q/r"};
    auto i = intersect_projects(a, b);
    CHECK(i.size_a == 2);
    CHECK(i.size_b == 2);
    CHECK(i.common == std::set<std::string>{"apache/ant"});
  }
}
