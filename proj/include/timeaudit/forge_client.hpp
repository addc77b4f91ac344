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

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "timeaudit/detectors.hpp"
#include "timeaudit/model.hpp"

namespace timeaudit {

enum class SourceKind { PrimaryForge, ArchiveFallback, LocalCache, FileStub };

std::string_view to_string(SourceKind kind);

struct MetadataSource {
  SourceKind kind = SourceKind::FileStub;
  /// Base URL for HTTP sources, directory for FileStub, file for LocalCache.
  std::string endpoint;
  /// HTTP path with {repo}, {owner}, {name} and {hash} placeholders.
  std::string path_template;
  /// Name of the environment variable holding a bearer token.
  std::string token_env;
};

/// Commit metadata as returned by any source; the record's timestamps are
/// normalized to seconds.
using CommitMetadata = CommitRecord;

enum class VerificationStatus { ConfirmedOnForge, ConfirmedOnArchive, Unverifiable };

std::string_view to_string(VerificationStatus status);
std::optional<VerificationStatus> parse_verification_status(std::string_view text);

struct VerificationOutcome {
  std::string commit_hash;
  VerificationStatus status = VerificationStatus::Unverifiable;
  Verified verified_flag = Verified::unknown;
  std::vector<std::string> parents;
  /// Source that answered; nullopt when every source was exhausted.
  std::optional<SourceKind> answered_by;
  std::optional<CommitMetadata> metadata;
};

/// What one attempt against one source produced.
struct FetchResponse {
  enum class State { Found, NotFound, RateLimited };

  State state = State::NotFound;
  std::optional<CommitMetadata> metadata;
  std::chrono::seconds retry_after{0};

  static FetchResponse found(CommitMetadata m) { return {State::Found, std::move(m), {}}; }
  static FetchResponse not_found() { return {}; }
  static FetchResponse rate_limited(std::chrono::seconds hint) { return {State::RateLimited, {}, hint}; }
};

/// A single metadata source. Implementations must be safe to call from
/// several threads.
class MetadataFetcher {
 public:
  virtual ~MetadataFetcher() = default;
  virtual SourceKind kind() const = 0;
  virtual bool uses_network() const = 0;
  virtual FetchResponse fetch(const std::string& repo_id, const std::string& hash) = 0;
};

/// Directory of per-commit documents named <hash>.json, each holding one
/// object in the NDJSON ingest schema.
class FileStubFetcher final : public MetadataFetcher {
 public:
  explicit FileStubFetcher(std::filesystem::path dir) : dir_(std::move(dir)) {}
  SourceKind kind() const override { return SourceKind::FileStub; }
  bool uses_network() const override { return false; }
  FetchResponse fetch(const std::string& repo_id, const std::string& hash) override;

  /// Writes one stub document per record (test and fixture helper).
  static void write(const std::filesystem::path& dir, std::span<const CommitRecord> records);

 private:
  std::filesystem::path dir_;
};

/// HTTP GET against a forge or archive. 404/410/422, transport failures and
/// 5xx read as NotFound; 429, and 403 with an exhausted quota, as
/// RateLimited.
class HttpFetcher final : public MetadataFetcher {
 public:
  explicit HttpFetcher(MetadataSource source);
  SourceKind kind() const override { return source_.kind; }
  bool uses_network() const override { return true; }
  FetchResponse fetch(const std::string& repo_id, const std::string& hash) override;

 private:
  MetadataSource source_;
};

/// Expands {repo}, {owner}, {name} and {hash}.
std::string expand_path_template(std::string_view tmpl, std::string_view repo_id, std::string_view hash);

/// Forge commit document (parents[].sha, commit.{author,committer}.date,
/// commit.message, commit.verification.verified). Throws std::runtime_error.
CommitMetadata parse_forge_commit_document(std::string_view body, std::string_view repo_id);

/// Archive revision document (id, parents[].id, date, committer_date,
/// message, author/committer fullname). Throws std::runtime_error.
CommitMetadata parse_archive_revision_document(std::string_view body, std::string_view repo_id);

/// Append-only NDJSON cache keyed by (repo id, hash).
class MetadataCache {
 public:
  /// Loads existing entries; a missing file is an empty cache.
  explicit MetadataCache(std::filesystem::path file);

  struct Entry {
    VerificationStatus status;
    CommitMetadata metadata;
  };

  std::optional<Entry> lookup(const std::string& repo_id, const std::string& hash) const;
  void store(const std::string& repo_id, const std::string& hash, const Entry& entry);
  std::size_t size() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, Entry> entries_;
};

struct ClientConfig {
  std::vector<MetadataSource> sources;
  std::size_t workers = 4;
  int max_attempts = 5;
  bool allow_network = true;
};

class SourcesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reads a sources document (see README). Relative paths resolve against
/// `base_dir`. Throws SourcesError.
ClientConfig parse_sources_document(std::string_view text, const std::filesystem::path& base_dir = {});

/// Tries sources in declared order; the first answer wins and is written to
/// the cache when one is configured.
class ForgeClient {
 public:
  using Sleeper = std::function<void(std::chrono::seconds)>;

  /// Builds fetchers for every source. Network sources are dropped when
  /// the config forbids network access. Throws SourcesError when nothing
  /// usable remains.
  explicit ForgeClient(const ClientConfig& config, Sleeper sleeper = {});

  /// For tests: explicit fetchers and an optional cache tried first.
  ForgeClient(std::vector<std::shared_ptr<MetadataFetcher>> fetchers,
              std::shared_ptr<MetadataCache> cache, int max_attempts = 5, Sleeper sleeper = {});

  VerificationOutcome fetch_commit_metadata(const std::string& repo_id, const std::string& hash);

  /// Requests sent to network-backed sources so far.
  std::size_t network_calls() const { return network_calls_.load(); }
  std::size_t workers() const { return workers_; }

 private:
  struct Slot {
    std::shared_ptr<MetadataFetcher> fetcher;  // null for the cache slot
    std::shared_ptr<std::mutex> gate;          // held while backing off
  };

  std::optional<CommitMetadata> try_source(Slot& slot, const std::string& repo_id,
                                           const std::string& hash);

  std::vector<Slot> slots_;
  std::shared_ptr<MetadataCache> cache_;
  int max_attempts_ = 5;
  std::size_t workers_ = 4;
  Sleeper sleep_;
  std::atomic<std::size_t> network_calls_{0};
};

struct VerificationAccounting {
  std::size_t input = 0;
  std::size_t confirmed_on_forge = 0;
  std::size_t confirmed_on_archive = 0;
  std::size_t unverifiable = 0;
  /// Candidates with at least one strictly newer parent.
  std::size_t confirmed = 0;
  /// Candidates whose fetched parents are all older (or equal).
  std::size_t false_positives = 0;

  double percent(std::size_t part) const {
    return input == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(input);
  }
};

struct VerificationResult {
  /// OutOfOrderParent anomalies with deltas from the fetched parents.
  std::vector<Anomaly> confirmed;
  /// Input candidates that were not confirmed.
  std::vector<Anomaly> dropped;
  VerificationAccounting accounting;
  std::vector<VerificationOutcome> outcomes;
};

/// Re-checks each candidate against its true parents as reported by the
/// sources. Merge exclusion and the date field follow `cfg`. A candidate
/// whose own metadata, or every one of whose parents, cannot be fetched is
/// dropped as unverifiable. Results are ordered by commit hash.
VerificationResult verify_anomalies(std::span<const Anomaly> candidates, ForgeClient& client,
                                    const DetectorConfig& cfg = {});

}  // namespace timeaudit
