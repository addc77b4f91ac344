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

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "timeaudit.h"

using json = nlohmann::json;

namespace {

std::string hash(int n) {
  std::string h = std::to_string(n);
  return std::string(40 - h.size(), 'a') + h;
}

std::string record(int n, long long date, const std::string& parent = "", const std::string& msg = "m") {
  json r = {{"hash", hash(n)},
            {"repo", "o/r"},
            {"parents", parent.empty() ? json::array() : json::array({parent})},
            {"author_date", date},
            {"committer_date", date},
            {"author", "ann"},
            {"committer", "ann"},
            {"message", msg}};
  return r.dump() + "\n";
}

struct Owned {
  char* p = nullptr;
  ~Owned() { ta_string_free(p); }
};

struct Dataset {
  ta_dataset* ds = nullptr;
  Dataset() { REQUIRE(ta_dataset_create(&ds) == TA_OK); }
  ~Dataset() { ta_dataset_free(ds); }
  void load(const std::string& text) {
    REQUIRE(ta_dataset_load_buffer(ds, text.data(), text.size(), "ndjson", nullptr, "fixture") == TA_OK);
  }
};

const char* kScanOptions = R"({"snapshot_date":"2020-01-01T00:00:00Z"})";

}  // namespace

TEST_CASE("load, scan, stats") {
  Dataset d;
  d.load(record(1, 1'500'000'000) + record(2, 1'400'000'000, hash(1)) + "garbage\n" + record(3, 0));
  CHECK(ta_dataset_size(d.ds) == 3);
  CHECK(ta_dataset_error_count(d.ds) == 1);
  Owned errors;
  REQUIRE(ta_dataset_errors_json(d.ds, &errors.p) == TA_OK);
  auto e = json::parse(errors.p);
  CHECK(e[0]["source"] == "fixture");
  CHECK(e[0]["line"] == 3);

  Owned report;
  size_t count = 0;
  REQUIRE(ta_scan(d.ds, kScanOptions, &report.p, &count) == TA_OK);
  auto r = json::parse(report.p);
  CHECK(r["summary"]["Old"]["commits"] == 1);
  CHECK(r["summary"]["OutOfOrderParent"]["commits"] == 1);
  CHECK(count == r["anomalies"].size());

  Owned tables, names, csv;
  REQUIRE(ta_stats(report.p, &tables.p) == TA_OK);
  REQUIRE(ta_stats_csv_names(tables.p, &names.p) == TA_OK);
  CHECK(std::string(names.p).find("delta_stats.csv\n") != std::string::npos);
  REQUIRE(ta_stats_csv(tables.p, "delta_stats.csv", &csv.p) == TA_OK);
  CHECK(std::string(csv.p).find("OutOfOrderParent,1,") != std::string::npos);
  Owned none;
  CHECK(ta_stats_csv(tables.p, "nope.csv", &none.p) == TA_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(ta_last_error()) > 0);
}

TEST_CASE("filter returns a new dataset and a ledger") {
  Dataset d;
  d.load(record(1, 1'500'000'000) + record(2, 0) + record(3, -5));
  ta_dataset* out = nullptr;
  Owned ledger;
  REQUIRE(ta_filter(d.ds, R"({"policies":[{"kind":"MinTimestamp","min_ts":1}]})", nullptr, &out, &ledger.p) ==
          TA_OK);
  CHECK(ta_dataset_size(out) == 1);
  auto l = json::parse(ledger.p);
  CHECK(l["ledgers"][0]["removed_commits"] == 2);
  CHECK(l["ledgers"][0]["retained_commits"] == 1);
  Owned ndjson;
  REQUIRE(ta_dataset_to_ndjson(out, &ndjson.p) == TA_OK);
  CHECK(std::string(ndjson.p).find(hash(1)) != std::string::npos);
  ta_dataset_free(out);
}

TEST_CASE("error codes") {
  Dataset d;
  d.load(record(1, 100, hash(2)) + record(2, 100, hash(1)));
  Owned report;
  CHECK(ta_scan(d.ds, kScanOptions, &report.p, nullptr) == TA_ERR_CYCLE);
  CHECK(std::string(ta_last_error()).find("cycle") != std::string::npos);

  Dataset ok;
  ok.load(record(1, 100));
  CHECK(ta_scan(ok.ds, nullptr, &report.p, nullptr) == TA_ERR_MISSING_SNAPSHOT);
  CHECK(ta_scan(ok.ds, R"({"detectors":["bogus"]})", &report.p, nullptr) == TA_ERR_INVALID_ARGUMENT);
  CHECK(ta_scan(ok.ds, "[1]", &report.p, nullptr) == TA_ERR_INVALID_ARGUMENT);
  CHECK(ta_scan(nullptr, nullptr, &report.p, nullptr) == TA_ERR_INVALID_ARGUMENT);

  ta_dataset* out = nullptr;
  Owned ledger;
  CHECK(ta_filter(ok.ds, R"([{"kind":"TopKStars","k":0}])", nullptr, &out, &ledger.p) == TA_ERR_POLICY);
  CHECK(out == nullptr);

  Owned tables;
  CHECK(ta_stats("{}", &tables.p) == TA_ERR_SCHEMA);
  CHECK(ta_stats("not json", &tables.p) == TA_ERR_SCHEMA);

  Owned verified;
  REQUIRE(ta_scan(ok.ds, kScanOptions, &report.p, nullptr) == TA_OK);
  CHECK(ta_verify(report.p, R"({"sources":[]})", nullptr, &verified.p) == TA_ERR_SOURCES);

  CHECK(ta_dataset_load_file(ok.ds, "/nonexistent/commits.ndjson", "ndjson", nullptr) == TA_ERR_IO);
  CHECK(ta_dataset_load_file(ok.ds, "/dev/null", "xml", nullptr) == TA_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ta_status_name(TA_ERR_CYCLE)) == "cycle detected");
  CHECK(std::string(ta_version()) == "1.0.0");
}
