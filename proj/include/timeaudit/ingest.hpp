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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "timeaudit/model.hpp"

namespace timeaudit {

enum class InputFormat { ndjson, gitlog };

std::optional<InputFormat> parse_input_format(std::string_view text);

/// A record the parser rejected. `line` is the 1-based line (NDJSON) or
/// record number (gitlog).
struct MalformedRecord {
  std::size_t line = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<CommitRecord> records;
  std::vector<MalformedRecord> errors;
};

/// Thrown by the single-record parsers; the stream parser catches it and
/// records a MalformedRecord instead.
class MalformedRecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a commit stream, skipping and reporting bad records.
///
/// gitlog input carries no repository name, so every record gets
/// `gitlog_repo_id`. NDJSON records name their own repository.
ParseResult parse_commit_stream(std::istream& in, InputFormat format,
                                std::string_view gitlog_repo_id = {});

ParseResult parse_commit_text(std::string_view text, InputFormat format,
                              std::string_view gitlog_repo_id = {});

/// One NDJSON object. Throws MalformedRecordError.
CommitRecord parse_ndjson_record(std::string_view line);

/// One gitlog record (the bytes between NUL terminators). Throws
/// MalformedRecordError.
CommitRecord parse_gitlog_record(std::string_view record, std::string_view repo_id);

/// Canonical NDJSON line (no trailing newline): fixed key order, seconds.
std::string to_ndjson_line(const CommitRecord& record);

/// Concatenation of to_ndjson_line with '\n' after each record.
std::string to_ndjson(std::span<const CommitRecord> records);

struct DuplicateHash {
  std::string hash;
  std::size_t occurrences = 0;

  friend bool operator==(const DuplicateHash&, const DuplicateHash&) = default;
};

struct DedupReport {
  std::size_t total_in = 0;
  std::size_t unique_out = 0;
  /// In order of first occurrence.
  std::vector<DuplicateHash> duplicate_hashes;
  /// Hashes whose copies disagree on committer_date. The first copy is kept.
  std::vector<std::string> conflicts;
};

struct DedupResult {
  std::vector<CommitRecord> records;
  DedupReport report;
};

/// Keeps the first occurrence of every hash, across repositories.
DedupResult deduplicate(std::vector<CommitRecord> records);

// Per-file VCS history (CVS/RCS style) before commits are reconstructed.
struct FileChange {
  std::string repo_id;
  std::string path;
  std::string author_id;
  Timestamp timestamp;
  std::string log;
};

struct Changeset {
  std::string repo_id;
  std::string author_id;
  std::vector<FileChange> changes;
  Timestamp start;
  Timestamp end;
};

inline constexpr std::int64_t kDefaultCoalesceWindowSeconds = 180;

/// Groups same-author file changes whose gap to the previous change of the
/// group is at most `window_seconds`. Output is ordered by (author, start).
/// Throws std::invalid_argument when changes span repositories, a path is
/// empty, or the window is negative.
std::vector<Changeset> coalesce_changesets(std::vector<FileChange> changes,
                                           std::int64_t window_seconds =
                                               kDefaultCoalesceWindowSeconds);

}  // namespace timeaudit
