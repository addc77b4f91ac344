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

#include "timeaudit/forge_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "timeaudit/ingest.hpp"

namespace timeaudit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Timestamp iso_field(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_string())
    throw std::runtime_error(std::string("document lacks date '") + key + "'");
  auto ts = parse_timestamp(doc[key].get<std::string>());
  if (!ts) throw std::runtime_error(std::string("unparseable date in '") + key + "'");
  return *ts;
}

std::string string_or_empty(const json& doc, const char* key) {
  auto it = doc.find(key);
  return it != doc.end() && it->is_string() ? it->get<std::string>() : std::string();
}

json parse_object(std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw std::runtime_error("response is not a JSON object");
  return doc;
}

std::vector<std::string> parent_ids(const json& doc, const char* id_key) {
  std::vector<std::string> out;
  if (!doc.contains("parents") || !doc["parents"].is_array()) return out;
  for (const auto& p : doc["parents"]) {
    if (p.is_string())
      out.push_back(to_lower(p.get<std::string>()));
    else if (p.is_object() && p.contains(id_key) && p[id_key].is_string())
      out.push_back(to_lower(p[id_key].get<std::string>()));
  }
  return out;
}

}  // namespace

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::PrimaryForge: return "primary_forge";
    case SourceKind::ArchiveFallback: return "archive";
    case SourceKind::LocalCache: return "local_cache";
    case SourceKind::FileStub: return "file_stub";
  }
  return "?";
}

std::string_view to_string(VerificationStatus status) {
  switch (status) {
    case VerificationStatus::ConfirmedOnForge: return "ConfirmedOnForge";
    case VerificationStatus::ConfirmedOnArchive: return "ConfirmedOnArchive";
    case VerificationStatus::Unverifiable: return "Unverifiable";
  }
  return "?";
}

std::optional<VerificationStatus> parse_verification_status(std::string_view text) {
  for (auto s : {VerificationStatus::ConfirmedOnForge, VerificationStatus::ConfirmedOnArchive,
                 VerificationStatus::Unverifiable})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// FileStub

FetchResponse FileStubFetcher::fetch(const std::string& /*repo_id*/, const std::string& hash) {
  const auto path = dir_ / (hash + ".json");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return FetchResponse::not_found();
  try {
    return FetchResponse::found(parse_ndjson_record(read_file(path)));
  } catch (const MalformedRecordError&) {
    return FetchResponse::not_found();
  }
}

void FileStubFetcher::write(const std::filesystem::path& dir, std::span<const CommitRecord> records) {
  std::filesystem::create_directories(dir);
  for (const auto& r : records) {
    std::ofstream out(dir / (r.hash + ".json"), std::ios::binary | std::ios::trunc);
    out << to_ndjson_line(r) << '\n';
  }
}

// ---------------------------------------------------------------------------
// HTTP

std::string expand_path_template(std::string_view tmpl, std::string_view repo_id, std::string_view hash) {
  const auto slash = repo_id.find('/');
  const std::string_view owner = slash == std::string_view::npos ? repo_id : repo_id.substr(0, slash);
  const std::string_view name = slash == std::string_view::npos ? std::string_view{} : repo_id.substr(slash + 1);
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    auto try_key = [&](std::string_view key, std::string_view value) {
      if (tmpl.substr(i, key.size()) != key) return false;
      out += value;
      i += key.size();
      return true;
    };
    if (try_key("{repo}", repo_id) || try_key("{owner}", owner) || try_key("{name}", name) ||
        try_key("{hash}", hash))
      continue;
    out += tmpl[i++];
  }
  return out;
}

CommitMetadata parse_forge_commit_document(std::string_view body, std::string_view repo_id) {
  const json doc = parse_object(body);
  if (!doc.contains("commit") || !doc["commit"].is_object())
    throw std::runtime_error("forge document has no 'commit' object");
  const json& commit = doc["commit"];

  CommitMetadata m;
  m.hash = to_lower(string_or_empty(doc, "sha"));
  m.repo_id = std::string(repo_id);
  m.parents = parent_ids(doc, "sha");
  const json empty = json::object();
  const json& author = commit.contains("author") && commit["author"].is_object() ? commit["author"] : empty;
  const json& committer =
      commit.contains("committer") && commit["committer"].is_object() ? commit["committer"] : empty;
  m.author_date = iso_field(author, "date");
  m.committer_date = iso_field(committer, "date");
  m.author_id = canonical_committer(string_or_empty(author, "name"));
  m.committer_id = canonical_committer(string_or_empty(committer, "name"));
  m.message = string_or_empty(commit, "message");
  if (commit.contains("verification") && commit["verification"].is_object()) {
    const auto& v = commit["verification"];
    if (v.contains("verified") && v["verified"].is_boolean())
      m.verified = v["verified"].get<bool>() ? Verified::yes : Verified::no;
  }
  return m;
}

CommitMetadata parse_archive_revision_document(std::string_view body, std::string_view repo_id) {
  const json doc = parse_object(body);
  CommitMetadata m;
  m.hash = to_lower(string_or_empty(doc, "id"));
  m.repo_id = std::string(repo_id);
  m.parents = parent_ids(doc, "id");
  m.author_date = iso_field(doc, "date");
  m.committer_date = iso_field(doc, "committer_date");
  auto person = [&](const char* key) {
    if (doc.contains(key) && doc[key].is_object()) {
      auto name = string_or_empty(doc[key], "name");
      return canonical_committer(name.empty() ? string_or_empty(doc[key], "fullname") : name);
    }
    return std::string(kNoName);
  };
  m.author_id = person("author");
  m.committer_id = person("committer");
  m.message = string_or_empty(doc, "message");
  // The archive keeps no record of forge-side signatures.
  m.verified = Verified::unknown;
  return m;
}

HttpFetcher::HttpFetcher(MetadataSource source) : source_(std::move(source)) {
  if (source_.path_template.empty())
    source_.path_template = source_.kind == SourceKind::ArchiveFallback ? "/api/1/revision/{hash}/"
                                                                        : "/repos/{repo}/commits/{hash}";
}

FetchResponse HttpFetcher::fetch(const std::string& repo_id, const std::string& hash) {
  httplib::Client client(source_.endpoint);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  client.set_follow_location(true);

  httplib::Headers headers{{"Accept", "application/json"}};
  if (!source_.token_env.empty()) {
    if (const char* token = std::getenv(source_.token_env.c_str()); token && *token)
      headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  auto res = client.Get(expand_path_template(source_.path_template, repo_id, hash), headers);
  if (!res) return FetchResponse::not_found();

  auto retry_hint = [&]() {
    long seconds = 1;
    if (res->has_header("Retry-After")) seconds = std::strtol(res->get_header_value("Retry-After").c_str(), nullptr, 10);
    return std::chrono::seconds(std::max(1L, seconds));
  };
  if (res->status == 429) return FetchResponse::rate_limited(retry_hint());
  if (res->status == 403 && res->get_header_value("X-RateLimit-Remaining") == "0")
    return FetchResponse::rate_limited(retry_hint());
  if (res->status != 200) return FetchResponse::not_found();

  try {
    auto meta = source_.kind == SourceKind::ArchiveFallback ? parse_archive_revision_document(res->body, repo_id)
                                                            : parse_forge_commit_document(res->body, repo_id);
    if (meta.hash.empty()) meta.hash = hash;
    return FetchResponse::found(std::move(meta));
  } catch (const std::exception&) {
    return FetchResponse::not_found();
  }
}

// ---------------------------------------------------------------------------
// Cache

MetadataCache::MetadataCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("record")) continue;
    auto status = parse_verification_status(doc.value("status", ""));
    if (!status) continue;
    try {
      Entry e{*status, parse_ndjson_record(doc["record"].dump())};
      entries_.insert_or_assign({doc.value("repo", ""), doc.value("hash", "")}, std::move(e));
    } catch (const MalformedRecordError&) {
    }
  }
}

std::optional<MetadataCache::Entry> MetadataCache::lookup(const std::string& repo_id,
                                                          const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find({repo_id, hash});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void MetadataCache::store(const std::string& repo_id, const std::string& hash, const Entry& entry) {
  std::lock_guard lock(mu_);
  if (!entries_.emplace(std::pair{repo_id, hash}, entry).second) return;
  ordered_json doc;
  doc["repo"] = repo_id;
  doc["hash"] = hash;
  doc["status"] = to_string(entry.status);
  doc["record"] = ordered_json::parse(to_ndjson_line(entry.metadata));
  if (!file_.empty()) {
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    out << doc.dump() << '\n';
  }
}

std::size_t MetadataCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// Sources document

ClientConfig parse_sources_document(std::string_view text, const std::filesystem::path& base_dir) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw SourcesError("sources document is not a JSON object");
  ClientConfig cfg;
  try {
    cfg.workers = doc.value("workers", std::size_t{4});
    cfg.max_attempts = doc.value("max_attempts", 5);
    cfg.allow_network = doc.value("allow_network", true);
  } catch (const json::exception& e) {
    throw SourcesError(std::string("sources document: ") + e.what());
  }
  if (cfg.workers == 0) throw SourcesError("workers must be >= 1");
  if (cfg.max_attempts < 1) throw SourcesError("max_attempts must be >= 1");
  if (!doc.contains("sources") || !doc["sources"].is_array())
    throw SourcesError("sources document needs a 'sources' array");

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_relative() && !base_dir.empty() ? base_dir / path : path).string();
  };
  for (const auto& s : doc["sources"]) {
    if (!s.is_object()) throw SourcesError("source entries must be objects");
    const std::string kind = s.value("kind", "");
    MetadataSource src;
    if (kind == "primary_forge" || kind == "archive") {
      src.kind = kind == "archive" ? SourceKind::ArchiveFallback : SourceKind::PrimaryForge;
      src.endpoint = s.value("endpoint", "");
      src.path_template = s.value("path_template", "");
      src.token_env = s.value("token_env", "");
      if (src.endpoint.empty()) throw SourcesError(kind + " source needs an 'endpoint'");
    } else if (kind == "file_stub" || kind == "local_cache") {
      src.kind = kind == "file_stub" ? SourceKind::FileStub : SourceKind::LocalCache;
      const std::string path = s.value("path", "");
      if (path.empty()) throw SourcesError(kind + " source needs a 'path'");
      src.endpoint = resolve(path);
    } else {
      throw SourcesError("unknown source kind '" + kind + "'");
    }
    cfg.sources.push_back(std::move(src));
  }
  if (cfg.sources.empty()) throw SourcesError("no sources configured");
  return cfg;
}

// ---------------------------------------------------------------------------
// Client

ForgeClient::ForgeClient(const ClientConfig& config, Sleeper sleeper)
    : max_attempts_(config.max_attempts), workers_(config.workers), sleep_(std::move(sleeper)) {
  for (const auto& src : config.sources) {
    switch (src.kind) {
      case SourceKind::LocalCache:
        if (!cache_) {
          cache_ = std::make_shared<MetadataCache>(src.endpoint);
          slots_.push_back({nullptr, std::make_shared<std::mutex>()});
        }
        break;
      case SourceKind::FileStub:
        slots_.push_back({std::make_shared<FileStubFetcher>(src.endpoint), std::make_shared<std::mutex>()});
        break;
      case SourceKind::PrimaryForge:
      case SourceKind::ArchiveFallback:
        if (config.allow_network)
          slots_.push_back({std::make_shared<HttpFetcher>(src), std::make_shared<std::mutex>()});
        break;
    }
  }
  const bool any_fetcher = std::any_of(slots_.begin(), slots_.end(), [](const Slot& s) { return s.fetcher; });
  if (!any_fetcher && !cache_) throw SourcesError("no usable metadata source (network disabled and no stub)");
  if (!sleep_) sleep_ = [](std::chrono::seconds s) { std::this_thread::sleep_for(s); };
}

ForgeClient::ForgeClient(std::vector<std::shared_ptr<MetadataFetcher>> fetchers,
                         std::shared_ptr<MetadataCache> cache, int max_attempts, Sleeper sleeper)
    : cache_(std::move(cache)), max_attempts_(max_attempts), sleep_(std::move(sleeper)) {
  if (cache_) slots_.push_back({nullptr, std::make_shared<std::mutex>()});
  for (auto& f : fetchers) slots_.push_back({std::move(f), std::make_shared<std::mutex>()});
  if (!sleep_) sleep_ = [](std::chrono::seconds s) { std::this_thread::sleep_for(s); };
}

std::optional<CommitMetadata> ForgeClient::try_source(Slot& slot, const std::string& repo_id,
                                                      const std::string& hash) {
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    // Wait out any backoff another worker is serving on this source.
    { std::lock_guard gate(*slot.gate); }
    if (slot.fetcher->uses_network()) ++network_calls_;
    FetchResponse res = slot.fetcher->fetch(repo_id, hash);
    switch (res.state) {
      case FetchResponse::State::Found: return std::move(res.metadata);
      case FetchResponse::State::NotFound: return std::nullopt;
      case FetchResponse::State::RateLimited: {
        if (attempt + 1 == max_attempts_) return std::nullopt;
        std::lock_guard gate(*slot.gate);
        sleep_(res.retry_after * (1LL << attempt));
        break;
      }
    }
  }
  return std::nullopt;
}

VerificationOutcome ForgeClient::fetch_commit_metadata(const std::string& repo_id, const std::string& hash) {
  VerificationOutcome out;
  out.commit_hash = hash;
  for (auto& slot : slots_) {
    std::optional<MetadataCache::Entry> entry;
    if (!slot.fetcher) {
      entry = cache_->lookup(repo_id, hash);
      if (!entry) continue;
      out.answered_by = SourceKind::LocalCache;
    } else {
      auto meta = try_source(slot, repo_id, hash);
      if (!meta) continue;
      const auto status = slot.fetcher->kind() == SourceKind::ArchiveFallback
                              ? VerificationStatus::ConfirmedOnArchive
                              : VerificationStatus::ConfirmedOnForge;
      if (status == VerificationStatus::ConfirmedOnArchive) meta->verified = Verified::unknown;
      entry = MetadataCache::Entry{status, std::move(*meta)};
      out.answered_by = slot.fetcher->kind();
      if (cache_) cache_->store(repo_id, hash, *entry);
    }
    out.status = entry->status;
    out.verified_flag = entry->metadata.verified;
    out.parents = entry->metadata.parents;
    out.metadata = std::move(entry->metadata);
    return out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification

namespace {

struct CandidateVerdict {
  VerificationOutcome outcome;
  bool fetched_any_parent = false;
  std::optional<Anomaly> confirmed;
};

CandidateVerdict verify_one(const Anomaly& candidate, ForgeClient& client, const DetectorConfig& cfg) {
  CandidateVerdict v;
  v.outcome = client.fetch_commit_metadata(candidate.repo_id, candidate.commit_hash);
  if (v.outcome.status == VerificationStatus::Unverifiable) return v;
  const CommitMetadata& child = *v.outcome.metadata;

  std::optional<std::int64_t> worst;
  std::string worst_parent;
  for (const auto& parent_hash : v.outcome.parents) {
    auto parent = client.fetch_commit_metadata(candidate.repo_id, parent_hash);
    if (parent.status == VerificationStatus::Unverifiable) continue;
    v.fetched_any_parent = true;
    const auto& p = *parent.metadata;
    if (cfg.exclude_merges && (is_merge_message(child.message) || is_merge_message(p.message))) continue;
    const std::int64_t delta = p.date(cfg.date_field).epoch_seconds - child.date(cfg.date_field).epoch_seconds;
    if (delta > 0 && (!worst || delta > *worst)) {
      worst = delta;
      worst_parent = parent_hash;
    }
  }
  if (worst) {
    v.confirmed = Anomaly{AnomalyKind::OutOfOrderParent, candidate.commit_hash, candidate.repo_id,
                          "verified against " + std::string(to_string(*v.outcome.answered_by)) +
                              ": parent " + worst_parent + " is newer by " + std::to_string(*worst) + "s",
                          worst};
  }
  return v;
}

}  // namespace

VerificationResult verify_anomalies(std::span<const Anomaly> candidates, ForgeClient& client,
                                    const DetectorConfig& cfg) {
  std::vector<Anomaly> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end(), [](const Anomaly& a, const Anomaly& b) {
    return std::tie(a.commit_hash, a.repo_id) < std::tie(b.commit_hash, b.repo_id);
  });

  std::vector<CandidateVerdict> verdicts(sorted.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < sorted.size(); i = next++) verdicts[i] = verify_one(sorted[i], client, cfg);
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(client.workers(), sorted.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);
    work();
  }

  VerificationResult result;
  auto& acc = result.accounting;
  acc.input = sorted.size();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    auto& v = verdicts[i];
    const bool orphaned = !v.outcome.parents.empty() && !v.fetched_any_parent;
    if (v.outcome.status == VerificationStatus::Unverifiable || orphaned) {
      ++acc.unverifiable;
      result.dropped.push_back(sorted[i]);
    } else {
      if (v.outcome.status == VerificationStatus::ConfirmedOnArchive)
        ++acc.confirmed_on_archive;
      else
        ++acc.confirmed_on_forge;
      if (v.confirmed) {
        ++acc.confirmed;
        result.confirmed.push_back(std::move(*v.confirmed));
      } else {
        ++acc.false_positives;
        result.dropped.push_back(sorted[i]);
      }
    }
    if (orphaned) v.outcome.status = VerificationStatus::Unverifiable;
    result.outcomes.push_back(std::move(v.outcome));
  }
  return result;
}

}  // namespace timeaudit
