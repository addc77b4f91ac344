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

#include "timeaudit/commit_graph.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <tuple>

namespace timeaudit {

namespace {

std::string describe_cycle(const std::vector<std::string>& cycle) {
  std::string text = "commit graph contains a cycle:";
  for (const auto& h : cycle) text += " " + h;
  return text;
}

}  // namespace

CycleDetected::CycleDetected(std::vector<std::string> cycle)
    : std::runtime_error(describe_cycle(cycle)), cycle_(std::move(cycle)) {}

CommitGraph CommitGraph::build(std::vector<CommitRecord> records) {
  CommitGraph g;
  if (!records.empty()) g.repo_id_ = records.front().repo_id;
  g.nodes_ = std::move(records);
  g.index_.reserve(g.nodes_.size());
  for (Index i = 0; i < g.nodes_.size(); ++i) {
    const auto& r = g.nodes_[i];
    if (r.repo_id != g.repo_id_)
      throw std::invalid_argument("commit graph mixes repositories '" + g.repo_id_ + "' and '" +
                                  r.repo_id + "'");
    if (!g.index_.emplace(r.hash, i).second)
      throw std::invalid_argument("duplicate commit " + r.hash + " in " + g.repo_id_ +
                                  "; deduplicate first");
  }

  const std::size_t n = g.nodes_.size();
  g.parents_.resize(n);
  g.children_.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (const auto& p : g.nodes_[i].parents) {
      auto it = g.index_.find(p);
      if (it == g.index_.end()) {
        g.dangling_.push_back({g.nodes_[i].hash, p});
        continue;
      }
      g.parents_[i].push_back(it->second);
      g.children_[it->second].push_back(i);
      ++g.edge_count_;
    }
  }

  // Kahn's algorithm over parent -> child edges.
  auto later = [&g](Index a, Index b) {
    const auto& ra = g.nodes_[a];
    const auto& rb = g.nodes_[b];
    return std::tie(ra.committer_date.epoch_seconds, ra.hash) >
           std::tie(rb.committer_date.epoch_seconds, rb.hash);
  };
  std::priority_queue<Index, std::vector<Index>, decltype(later)> ready(later);
  std::vector<std::size_t> pending(n);
  for (Index i = 0; i < n; ++i) {
    pending[i] = g.parents_[i].size();
    if (pending[i] == 0) ready.push(i);
  }
  g.topo_.reserve(n);
  while (!ready.empty()) {
    const Index i = ready.top();
    ready.pop();
    g.topo_.push_back(i);
    for (Index c : g.children_[i])
      if (--pending[c] == 0) ready.push(c);
  }

  if (g.topo_.size() != n) {
    // Every unplaced node still waits on an unplaced parent, so following
    // those parents must revisit a node.
    Index start = 0;
    while (pending[start] == 0) ++start;
    std::vector<std::size_t> seen_at(n, SIZE_MAX);
    std::vector<Index> walk;
    Index cur = start;
    while (seen_at[cur] == SIZE_MAX) {
      seen_at[cur] = walk.size();
      walk.push_back(cur);
      for (Index p : g.parents_[cur]) {
        if (pending[p] != 0) {
          cur = p;
          break;
        }
      }
    }
    std::vector<std::string> cycle;
    for (std::size_t k = seen_at[cur]; k < walk.size(); ++k) cycle.push_back(g.nodes_[walk[k]].hash);
    throw CycleDetected(std::move(cycle));
  }
  return g;
}

std::optional<CommitGraph::Index> CommitGraph::find(std::string_view hash) const {
  auto it = index_.find(std::string(hash));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> topological_order(const CommitGraph& graph) {
  std::vector<std::string> out;
  out.reserve(graph.size());
  for (auto i : graph.topological_indices()) out.push_back(graph.node(i).hash);
  return out;
}

std::vector<CommitRecord> ordered_records(const CommitGraph& graph) {
  std::vector<CommitRecord> out;
  out.reserve(graph.size());
  for (auto i : graph.topological_indices()) out.push_back(graph.node(i));
  return out;
}

std::vector<ParentDelta> parent_deltas(const CommitGraph& graph, DateField field) {
  std::vector<ParentDelta> out;
  out.reserve(graph.edge_count());
  for (auto c : graph.topological_indices()) {
    const auto& child = graph.node(c);
    for (auto p : graph.parents(c)) {
      const auto& parent = graph.node(p);
      out.push_back({child.hash, parent.hash,
                     parent.date(field).epoch_seconds - child.date(field).epoch_seconds});
    }
  }
  return out;
}

std::vector<std::vector<CommitRecord>> split_by_repo(std::vector<CommitRecord> records) {
  std::map<std::string, std::vector<CommitRecord>> by_repo;
  for (auto& r : records) by_repo[r.repo_id].push_back(std::move(r));
  std::vector<std::vector<CommitRecord>> out;
  out.reserve(by_repo.size());
  for (auto& [_, list] : by_repo) out.push_back(std::move(list));
  return out;
}

}  // namespace timeaudit
