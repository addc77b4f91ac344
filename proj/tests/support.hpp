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

// Fixture builders shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "timeaudit/model.hpp"

namespace timeaudit::testing {

/// Deterministic 40-hex object id for node `index` of fixture `fixture`.
inline std::string hex_id(std::uint64_t fixture, std::uint64_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%08llx%032llx", static_cast<unsigned long long>(fixture & 0xffffffffu),
                static_cast<unsigned long long>(index));
  return buf;
}

inline CommitRecord commit(std::string hash, std::int64_t committer_epoch, std::vector<std::string> parents = {},
                           std::string message = "change", std::string repo = "acme/widgets") {
  CommitRecord r;
  r.hash = std::move(hash);
  r.repo_id = std::move(repo);
  r.parents = std::move(parents);
  r.committer_date = {committer_epoch, 0};
  r.author_date = {committer_epoch, 0};
  r.author_id = "dev";
  r.committer_id = "dev";
  r.message = std::move(message);
  return r;
}

struct DagOptions {
  std::size_t max_nodes = 50;
  std::size_t max_parents = 3;
  /// Dates are base + step * U[0, spread]; a small spread forces ties.
  std::int64_t base = 1'400'000'000;
  std::int64_t step = 60;
  std::int64_t spread = 40;
  double merge_message_rate = 0.1;
  double dangling_rate = 0.05;
};

/// Random commit DAG: node i only takes parents among nodes < i, so the
/// result is acyclic by construction. Records are returned shuffled.
inline std::vector<CommitRecord> random_dag(std::mt19937_64& rng, std::uint64_t fixture,
                                            const DagOptions& opt = {}, const std::string& repo = "acme/widgets") {
  std::uniform_int_distribution<std::size_t> n_dist(1, opt.max_nodes);
  std::uniform_int_distribution<std::int64_t> date_dist(0, opt.spread);
  std::bernoulli_distribution merge_msg(opt.merge_message_rate);
  std::bernoulli_distribution dangling(opt.dangling_rate);
  const std::size_t n = n_dist(rng);
  std::vector<CommitRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> parents;
    if (i > 0) {
      std::uniform_int_distribution<std::size_t> k_dist(1, std::min(opt.max_parents, i));
      std::uniform_int_distribution<std::size_t> p_dist(0, i - 1);
      std::set<std::size_t> picked;
      for (std::size_t k = k_dist(rng); picked.size() < k;) picked.insert(p_dist(rng));
      for (auto p : picked) parents.push_back(hex_id(fixture, p));
    }
    if (dangling(rng)) parents.push_back(hex_id(fixture + 1'000'000, i));
    std::string msg = merge_msg(rng) ? "Merge branch 'topic'" : "commit " + std::to_string(i);
    out.push_back(commit(hex_id(fixture, i), opt.base + opt.step * date_dist(rng), std::move(parents),
                         std::move(msg), repo));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace timeaudit::testing
