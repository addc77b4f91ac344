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

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "timeaudit/model.hpp"

namespace timeaudit {

/// Raised when the parent links of an export form a cycle.
class CycleDetected : public std::runtime_error {
 public:
  explicit CycleDetected(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

struct DanglingParent {
  std::string child;
  std::string missing_parent;

  friend bool operator==(const DanglingParent&, const DanglingParent&) = default;
};

struct ParentDelta {
  std::string child;
  std::string parent;
  /// parent date minus child date.
  std::int64_t delta_seconds = 0;

  friend bool operator==(const ParentDelta&, const ParentDelta&) = default;
};

/// Immutable commit DAG of one repository.
///
/// Nodes are addressed by dense index in input order. Parent references that
/// do not resolve to a node are kept aside as dangling and take no part in
/// ordering or delta computation.
class CommitGraph {
 public:
  using Index = std::size_t;

  /// Throws CycleDetected for cyclic input and std::invalid_argument when the
  /// records mix repositories or repeat a hash.
  static CommitGraph build(std::vector<CommitRecord> records);

  const std::string& repo_id() const noexcept { return repo_id_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  const CommitRecord& node(Index i) const { return nodes_.at(i); }
  std::span<const CommitRecord> nodes() const noexcept { return nodes_; }
  std::optional<Index> find(std::string_view hash) const;

  /// Resolved parents of node i, in the order the record lists them.
  std::span<const Index> parents(Index i) const { return parents_.at(i); }
  std::span<const Index> children(Index i) const { return children_.at(i); }

  std::span<const DanglingParent> dangling_parents() const noexcept { return dangling_; }

  /// Kahn order; ready nodes leave by (committer date, hash) ascending.
  std::span<const Index> topological_indices() const noexcept { return topo_; }

 private:
  CommitGraph() = default;

  std::string repo_id_;
  std::vector<CommitRecord> nodes_;
  std::unordered_map<std::string, Index> index_;
  std::vector<std::vector<Index>> parents_;
  std::vector<std::vector<Index>> children_;
  std::vector<DanglingParent> dangling_;
  std::vector<Index> topo_;
  std::size_t edge_count_ = 0;
};

std::vector<std::string> topological_order(const CommitGraph& graph);

/// Records in topological order.
std::vector<CommitRecord> ordered_records(const CommitGraph& graph);

/// One entry per resolved edge, in topological order of the child and then
/// parent-list order.
std::vector<ParentDelta> parent_deltas(const CommitGraph& graph,
                                       DateField field = DateField::committer);

/// Splits a multi-repository record list into per-repository lists, ordered
/// by repo id. Input order is kept within each repository.
std::vector<std::vector<CommitRecord>> split_by_repo(std::vector<CommitRecord> records);

}  // namespace timeaudit
