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
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "timeaudit/ingest.hpp"

using namespace timeaudit;
using timeaudit::testing::commit;
using timeaudit::testing::hex_id;

namespace {

const std::string kHashA = "aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa";
const std::string kHashB = "bbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbb";

std::string gitlog_record(const std::string& hash, const std::string& parents, const std::string& ct,
                          const std::string& cz, const std::string& at, const std::string& az,
                          const std::string& cn, const std::string& an, const std::string& msg) {
  const char us = '\x1f';
  return hash + us + parents + us + ct + us + cz + us + at + us + az + us + cn + us + an + us + msg +
         std::string(1, '\0');
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("ndjson record with unit, offsets and null committer") {
    const std::string line = R"({"hash":")" + kHashA + R"(","repo":"apache/ant","parents":[")" + kHashB +
                             R"("],"author_date":-2044178335000000,"committer_date":1000000000000,)"
                             R"("date_unit":"us","tz_offset_min":-300,"author":"Ann","committer":null,)"
                             R"("message":"git-svn-id: x","verified":true,"stars":12})";
    auto r = parse_ndjson_record(line);
    CHECK(r.hash == kHashA);
    CHECK(r.repo_id == "apache/ant");
    CHECK(r.parents == std::vector<std::string>{kHashB});
    CHECK(r.author_date.epoch_seconds == -2044178335);
    CHECK(r.committer_date.epoch_seconds == 1000000);
    CHECK(r.committer_date.tz_offset_minutes == -300);
    CHECK(r.author_id == "Ann");
    CHECK(r.committer_id == kNoName);
    CHECK(r.verified == Verified::yes);
    CHECK(r.stars == 12u);
  }

  TEST_CASE("upper-case ids are lowercased and duplicate parents collapse") {
    std::string upper = kHashB;
    for (auto& c : upper) c = 'B';
    const std::string line = R"({"hash":")" + kHashA + R"(","repo":"r","parents":[")" + upper + R"(",")" +
                             kHashB + R"("],"author_date":1,"committer_date":1,"author":"","committer":" ",)"
                             R"("message":""})";
    auto r = parse_ndjson_record(line);
    CHECK(r.parents == std::vector<std::string>{kHashB});
    CHECK(r.author_id == kNoName);
    CHECK(r.committer_id == kNoName);
  }

  TEST_CASE("malformed lines are skipped and reported with line numbers") {
    std::ostringstream text;
    text << R"({"hash":")" << kHashA
         << R"(","repo":"r","parents":[],"author_date":1,"committer_date":1,"author":"a","committer":"a","message":"m"})"
         << "\n";
    text << "{not json\n";
    text << "\n";
    text << R"({"hash":"xyz","repo":"r","parents":[],"author_date":1,"committer_date":1,"author":"a","committer":"a","message":"m"})"
         << "\n";
    text << R"({"hash":")" << kHashB << R"(","repo":"r","parents":[")" << kHashB
         << R"("],"author_date":1,"committer_date":1,"author":"a","committer":"a","message":"m"})" << "\n";
    text << R"({"hash":")" << kHashB
         << R"(","repo":"r","parents":[],"author_date":1,"committer_date":"x","author":"a","committer":"a","message":"m"})"
         << "\n";
    text << R"({"hash":")" << kHashB
         << R"(","repo":"r","parents":[],"author_date":1,"committer_date":1,"date_unit":"ns","author":"a","committer":"a","message":"m"})"
         << "\n";
    auto res = parse_commit_text(text.str(), InputFormat::ndjson);
    REQUIRE(res.records.size() == 1);
    REQUIRE(res.errors.size() == 5);
    CHECK(res.errors[0].line == 2);
    CHECK(res.errors[1].line == 4);
    CHECK(res.errors[2].line == 5);
    CHECK(res.errors[3].line == 6);
    CHECK(res.errors[4].line == 7);
  }

  TEST_CASE("svn revision ids are accepted") {
    const std::string line =
        R"({"hash":"r42@svn.example.org/repo","repo":"r","parents":["r41@svn.example.org/repo"],)"
        R"("author_date":1,"committer_date":1,"author":"a","committer":"a","message":"m"})";
    auto r = parse_ndjson_record(line);
    CHECK(r.hash == "r42@svn.example.org/repo");
  }

  TEST_CASE("gitlog records") {
    std::string text = gitlog_record(kHashA, kHashB, "1500000000", "+0200", "1400000000", "-0130", "Carol",
                                     "Dave", "Fix\n\ngit-svn-id: svn://x@1\n");
    text += "\n" + gitlog_record(kHashB, "", "0", "+0000", "0", "+0000", "", "Eve", "initial");
    text += gitlog_record("zz", "", "0", "+0000", "0", "+0000", "", "", "bad");
    auto res = parse_commit_text(text, InputFormat::gitlog, "svn/mirror");
    REQUIRE(res.records.size() == 2);
    REQUIRE(res.errors.size() == 1);
    CHECK(res.errors[0].line == 3);
    const auto& a = res.records[0];
    CHECK(a.repo_id == "svn/mirror");
    CHECK(a.parents == std::vector<std::string>{kHashB});
    CHECK(a.committer_date.epoch_seconds == 1500000000);
    CHECK(a.committer_date.tz_offset_minutes == 120);
    CHECK(a.author_date.tz_offset_minutes == -90);
    CHECK(a.committer_id == "Carol");
    CHECK(a.author_id == "Dave");
    CHECK(a.message.find("git-svn-id:") != std::string::npos);
    CHECK(res.records[1].parents.empty());
    CHECK(res.records[1].committer_id == kNoName);
  }

  TEST_CASE("ndjson round trip") {
    std::mt19937_64 rng(3);
    auto records = timeaudit::testing::random_dag(rng, 9);
    records[0].stars = 5;
    records[0].verified = Verified::no;
    records[0].committer_date.tz_offset_minutes = 330;
    auto back = parse_commit_text(to_ndjson(records), InputFormat::ndjson);
    REQUIRE(back.errors.empty());
    REQUIRE(back.records.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(back.records[i].hash == records[i].hash);
      CHECK(back.records[i].parents == records[i].parents);
      CHECK(back.records[i].committer_date.epoch_seconds == records[i].committer_date.epoch_seconds);
      CHECK(back.records[i].committer_date.tz_offset_minutes == records[i].committer_date.tz_offset_minutes);
      CHECK(back.records[i].message == records[i].message);
      CHECK(back.records[i].stars == records[i].stars);
      CHECK(back.records[i].verified == records[i].verified);
    }
    CHECK(to_ndjson(back.records) == to_ndjson(records));
  }

  TEST_CASE("deduplicate matches a counting oracle") {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 200; ++round) {
      std::uniform_int_distribution<int> n(0, 60), pick(0, 20);
      std::vector<CommitRecord> in;
      for (int i = 0, k = n(rng); i < k; ++i) {
        const int id = pick(rng);
        in.push_back(commit(hex_id(round, id), 1000 + i, {}, "m", "repo" + std::to_string(i % 3)));
      }
      std::map<std::string, std::size_t> counts;
      std::vector<std::string> first_order;
      for (const auto& r : in)
        if (counts[r.hash]++ == 0) first_order.push_back(r.hash);

      auto res = deduplicate(in);
      CHECK(res.report.total_in == in.size());
      CHECK(res.report.unique_out == counts.size());
      CHECK(res.records.size() == counts.size());
      for (std::size_t i = 0; i < first_order.size(); ++i) CHECK(res.records[i].hash == first_order[i]);
      std::vector<DuplicateHash> expected;
      for (const auto& h : first_order)
        if (counts[h] > 1) expected.push_back({h, counts[h]});
      CHECK(res.report.duplicate_hashes == expected);
      // Every duplicated hash here has copies with different dates.
      CHECK(res.report.conflicts.size() == expected.size());

      auto again = deduplicate(res.records);
      CHECK(again.records.size() == res.records.size());
      CHECK(again.report.duplicate_hashes.empty());
    }
  }

  TEST_CASE("coalesce matches brute-force grouping") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 300; ++round) {
      std::uniform_int_distribution<int> n(1, 30), author(0, 2), t(0, 1200);
      std::vector<FileChange> changes;
      for (int i = 0, k = n(rng); i < k; ++i)
        changes.push_back({"cvs/proj", "f" + std::to_string(i), "u" + std::to_string(author(rng)), {t(rng), 0}, "log"});
      const std::int64_t window = 180;

      // Oracle: per author, sorted times, split wherever a gap exceeds the window.
      std::map<std::string, std::vector<std::int64_t>> by_author;
      for (const auto& c : changes) by_author[c.author_id].push_back(c.timestamp.epoch_seconds);
      std::vector<std::tuple<std::string, std::int64_t, std::int64_t, std::size_t>> expected;
      for (auto& [who, times] : by_author) {
        std::sort(times.begin(), times.end());
        std::size_t begin = 0;
        for (std::size_t i = 1; i <= times.size(); ++i) {
          if (i == times.size() || times[i] - times[i - 1] > window) {
            expected.emplace_back(who, times[begin], times[i - 1], i - begin);
            begin = i;
          }
        }
      }

      auto got = coalesce_changesets(changes, window);
      REQUIRE(got.size() == expected.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].author_id == std::get<0>(expected[i]));
        CHECK(got[i].start.epoch_seconds == std::get<1>(expected[i]));
        CHECK(got[i].end.epoch_seconds == std::get<2>(expected[i]));
        CHECK(got[i].changes.size() == std::get<3>(expected[i]));
      }
    }
  }

  TEST_CASE("coalesce chains on the gap to the previous change") {
    std::vector<FileChange> changes = {
        {"r", "a", "u", {0, 0}, ""}, {"r", "b", "u", {100, 0}, ""}, {"r", "c", "u", {200, 0}, ""},
        {"r", "d", "u", {381, 0}, ""}, {"r", "e", "v", {100, 0}, ""}};
    auto got = coalesce_changesets(changes, 180);
    REQUIRE(got.size() == 3);
    CHECK(got[0].changes.size() == 3);
    CHECK(got[0].end.epoch_seconds == 200);
    CHECK(got[1].changes.size() == 1);
    CHECK(got[2].author_id == "v");
    CHECK_THROWS_AS(coalesce_changesets({{"r", "", "u", {0, 0}, ""}}), std::invalid_argument);
    CHECK_THROWS_AS(coalesce_changesets({{"r", "a", "u", {0, 0}, ""}, {"s", "a", "u", {0, 0}, ""}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(coalesce_changesets(changes, -1), std::invalid_argument);
  }
}
