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

#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "timeaudit/detectors.hpp"

using namespace timeaudit;
using timeaudit::testing::commit;
using timeaudit::testing::hex_id;
using timeaudit::testing::random_dag;

namespace {

bool mentions_merge(const std::string& msg) {
  std::string lower;
  for (char c : msg) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower.find("merge") != std::string::npos;
}

// Oracle: every (child, parent) pair in the record list, worst delta per child.
std::map<std::string, std::int64_t> brute_force_parents(const std::vector<CommitRecord>& records,
                                                        bool exclude_merges) {
  std::map<std::string, std::int64_t> worst;
  for (const auto& child : records)
    for (const auto& parent : records) {
      if (std::find(child.parents.begin(), child.parents.end(), parent.hash) == child.parents.end()) continue;
      if (exclude_merges && (mentions_merge(child.message) || mentions_merge(parent.message))) continue;
      const auto delta = parent.committer_date.epoch_seconds - child.committer_date.epoch_seconds;
      if (delta > 0) worst[child.hash] = std::max(worst[child.hash], delta);
    }
  return worst;
}

std::map<std::string, std::int64_t> as_map(const std::vector<Anomaly>& anomalies) {
  std::map<std::string, std::int64_t> out;
  for (const auto& a : anomalies) {
    REQUIRE(a.delta_seconds.has_value());
    REQUIRE(out.emplace(a.commit_hash, *a.delta_seconds).second);
  }
  return out;
}

}  // namespace

TEST_SUITE("detectors") {
  TEST_CASE("parent detector equals brute force on random DAGs") {
    std::mt19937_64 rng(17);
    for (std::uint64_t f = 0; f < 300; ++f) {
      auto records = random_dag(rng, f);
      const bool exclude = f % 2 == 0;
      DetectorConfig cfg;
      cfg.exclude_merges = exclude;
      auto got = detect_out_of_order_parents(CommitGraph::build(records), cfg);
      for (const auto& a : got) CHECK(a.kind == AnomalyKind::OutOfOrderParent);
      REQUIRE(as_map(got) == brute_force_parents(records, exclude));
    }
  }

  TEST_CASE("linear detector compares each commit with its predecessor in the walk") {
    std::mt19937_64 rng(4);
    for (std::uint64_t f = 0; f < 200; ++f) {
      auto records = random_dag(rng, f);
      auto ordered = ordered_records(CommitGraph::build(records));
      std::map<std::string, std::int64_t> expected;
      for (std::size_t i = 1; i < ordered.size(); ++i) {
        const auto delta = ordered[i - 1].committer_date.epoch_seconds - ordered[i].committer_date.epoch_seconds;
        if (delta > 0 && !mentions_merge(ordered[i].message) && !mentions_merge(ordered[i - 1].message))
          expected[ordered[i].hash] = delta;
      }
      CHECK(as_map(detect_out_of_order_linear(ordered, {})) == expected);
    }
  }

  TEST_CASE("strict boundaries") {
    DetectorConfig cfg;
    cfg.future_cutoff = Timestamp{1'600'000'000, 0};
    std::vector<CommitRecord> records = {commit(hex_id(1, 1), kCvsReleaseEpoch),
                                         commit(hex_id(1, 2), kCvsReleaseEpoch - 1),
                                         commit(hex_id(1, 3), 1'600'000'000),
                                         commit(hex_id(1, 4), 1'600'000'001)};
    auto old = detect_old(records, cfg);
    REQUIRE(old.size() == 1);
    CHECK(old[0].commit_hash == hex_id(1, 2));
    auto future = detect_future(records, cfg);
    REQUIRE(future.size() == 1);
    CHECK(future[0].commit_hash == hex_id(1, 4));

    auto p = hex_id(2, 1), c = hex_id(2, 2);
    std::vector<CommitRecord> tie = {commit(p, 500), commit(c, 500, {p})};
    CHECK(detect_out_of_order_parents(CommitGraph::build(tie), cfg).empty());
    CHECK(detect_out_of_order_linear(ordered_records(CommitGraph::build(tie)), cfg).empty());
  }

  TEST_CASE("future detector needs a snapshot") {
    CHECK_THROWS_AS(detect_future(std::vector<CommitRecord>{commit(hex_id(1, 1), 1)}, DetectorConfig{}),
                    MissingSnapshotDate);
    DetectorConfig bad;
    bad.future_cutoff = Timestamp{kCvsReleaseEpoch, 0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("epoch zero is old") {
    auto out = detect_old(std::vector<CommitRecord>{commit(hex_id(1, 1), 0)}, {});
    CHECK(out.size() == 1);
  }

  TEST_CASE("merge exclusion applies to either side of the pair") {
    auto p = hex_id(3, 1), c = hex_id(3, 2);
    for (int side = 0; side < 2; ++side) {
      std::vector<CommitRecord> records = {commit(p, 900, {}, side == 0 ? "MERGE pull request" : "parent"),
                                           commit(c, 100, {p}, side == 1 ? "Merged topic" : "child")};
      auto graph = CommitGraph::build(records);
      DetectorConfig cfg;
      CHECK(detect_out_of_order_parents(graph, cfg).empty());
      cfg.exclude_merges = false;
      CHECK(detect_out_of_order_parents(graph, cfg).size() == 1);
    }
    CHECK(is_merge_message("Submerged"));
    CHECK_FALSE(is_merge_message("emerg"));
  }

  TEST_CASE("author date field") {
    auto p = hex_id(4, 1), c = hex_id(4, 2);
    auto parent = commit(p, 100);
    auto child = commit(c, 200, {p});
    child.author_date = {50, 0};
    auto graph = CommitGraph::build({parent, child});
    CHECK(detect_out_of_order_parents(graph, {}).empty());
    DetectorConfig cfg;
    cfg.date_field = DateField::author;
    auto got = detect_out_of_order_parents(graph, cfg);
    REQUIRE(got.size() == 1);
    CHECK(got[0].delta_seconds == 50);
  }

  TEST_CASE("tool signatures") {
    using S = ToolSignature;
    CHECK(match_tool_signatures("x\n\ngit-svn-id: https://svn/x@12 abc") == std::vector<S>{S::GitSvnId});
    CHECK(match_tool_signatures("Change-Id: I0123") == std::vector<S>{S::ChangeId});
    CHECK(match_tool_signatures("Reviewed-by: A") == std::vector<S>{S::ReviewedBy});
    CHECK(match_tool_signatures("rebase_source: abc") == std::vector<S>{S::RebaseSource});
    CHECK(match_tool_signatures("imported from HG repo") == std::vector<S>{S::Hg});
    CHECK(match_tool_signatures("[moe] sync") == std::vector<S>{S::Moe});
    CHECK(match_tool_signatures("change-id: lower case footer").empty());
    CHECK(match_tool_signatures("highway thought moebius").empty());
    CHECK(match_tool_signatures("hgweb chg").empty());
    CHECK(match_tool_signatures("git-svn-id: a\nChange-Id: b\nhg").size() == 3);
  }

  TEST_CASE("verified mismatch equals an edge scan") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> v(0, 2);
    for (std::uint64_t f = 0; f < 100; ++f) {
      auto records = random_dag(rng, f);
      for (auto& r : records) r.verified = static_cast<Verified>(v(rng));
      std::map<std::string, const CommitRecord*> by_hash;
      for (const auto& r : records) by_hash[r.hash] = &r;
      std::multiset<std::string> expected, got;
      for (const auto& r : records)
        for (const auto& p : r.parents)
          if (by_hash.count(p) && r.verified == Verified::yes && by_hash[p]->verified == Verified::no &&
              by_hash[p]->committer_date > r.committer_date)
            expected.insert(r.hash);
      for (const auto& a : detect_verified_mismatch(CommitGraph::build(records))) got.insert(a.commit_hash);
      CHECK(got == expected);
    }
  }

  TEST_CASE("intersection") {
    std::vector<Anomaly> a = {{AnomalyKind::Old, "b", "r", "", {}}, {AnomalyKind::Old, "a", "r", "", {}}};
    std::vector<Anomaly> b = {{AnomalyKind::OutOfOrderParent, "a", "r", "", 1},
                              {AnomalyKind::OutOfOrderParent, "c", "r", "", 1},
                              {AnomalyKind::OutOfOrderParent, "a", "r", "", 2}};
    CHECK(intersect_anomalies(a, b) == std::vector<std::string>{"a"});
  }
}
