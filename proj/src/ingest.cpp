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

#include "timeaudit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace timeaudit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kFieldSep = '\x1f';
constexpr char kRecordSep = '\0';
constexpr std::size_t kGitlogFields = 9;

[[noreturn]] void malformed(const std::string& reason) { throw MalformedRecordError(reason); }

std::string checked_commit_id(std::string_view raw, std::string_view what) {
  if (is_hex_object_id(raw)) return to_lower(raw);
  if (is_svn_revision_id(raw)) return std::string(raw);
  malformed(std::string(what) + " '" + std::string(raw) +
            "' is neither a 40-hex object id nor r<N>@<repo>");
}

// Drops repeated parents; a self-parent is rejected.
std::vector<std::string> checked_parents(std::vector<std::string> parents, const std::string& hash) {
  std::vector<std::string> out;
  out.reserve(parents.size());
  for (auto& p : parents) {
    if (p == hash) malformed("commit lists itself as a parent");
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  }
  return out;
}

std::int64_t required_int(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) malformed(std::string("missing key '") + key + "'");
  if (!it->is_number_integer()) malformed(std::string("key '") + key + "' must be an integer");
  return it->get<std::int64_t>();
}

std::string required_string(const json& doc, const char* key, bool allow_null = false) {
  auto it = doc.find(key);
  if (it == doc.end()) malformed(std::string("missing key '") + key + "'");
  if (allow_null && it->is_null()) return {};
  if (!it->is_string()) malformed(std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

std::int32_t optional_tz(const json& doc, const char* key, std::int32_t fallback) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return fallback;
  if (!it->is_number_integer()) malformed(std::string("key '") + key + "' must be an integer");
  const auto minutes = it->get<std::int64_t>();
  if (!valid_tz_offset(minutes)) malformed(std::string("key '") + key + "' out of range");
  return static_cast<std::int32_t>(minutes);
}

std::int64_t parse_int_field(std::string_view text, const char* what) {
  std::int64_t value = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || p != text.data() + text.size())
    malformed(std::string(what) + " '" + std::string(text) + "' is not an integer");
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

void parse_ndjson_into(std::istream& in, ParseResult& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      out.records.push_back(parse_ndjson_record(line));
    } catch (const MalformedRecordError& e) {
      out.errors.push_back({line_no, e.what()});
    }
  }
}

void parse_gitlog_into(std::istream& in, std::string_view repo_id, ParseResult& out) {
  std::string record;
  std::size_t record_no = 0;
  while (std::getline(in, record, kRecordSep)) {
    if (is_blank(record)) continue;
    ++record_no;
    try {
      out.records.push_back(parse_gitlog_record(record, repo_id));
    } catch (const MalformedRecordError& e) {
      out.errors.push_back({record_no, e.what()});
    }
  }
}

}  // namespace

std::optional<InputFormat> parse_input_format(std::string_view text) {
  if (text == "ndjson") return InputFormat::ndjson;
  if (text == "gitlog") return InputFormat::gitlog;
  return std::nullopt;
}

CommitRecord parse_ndjson_record(std::string_view line) {
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) malformed("not valid JSON");
  if (!doc.is_object()) malformed("record is not a JSON object");

  CommitRecord r;
  r.hash = checked_commit_id(required_string(doc, "hash"), "hash");
  r.repo_id = required_string(doc, "repo");
  if (r.repo_id.empty()) malformed("empty repo id");

  auto parents = doc.find("parents");
  if (parents == doc.end()) malformed("missing key 'parents'");
  if (!parents->is_array()) malformed("key 'parents' must be an array");
  std::vector<std::string> ids;
  for (const auto& p : *parents) {
    if (!p.is_string()) malformed("parent ids must be strings");
    ids.push_back(checked_commit_id(p.get<std::string>(), "parent"));
  }
  r.parents = checked_parents(std::move(ids), r.hash);

  TimeUnit unit = TimeUnit::seconds;
  if (auto it = doc.find("date_unit"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) malformed("key 'date_unit' must be a string");
    auto parsed = parse_time_unit(it->get<std::string>());
    if (!parsed) malformed("date_unit must be one of s, ms, us");
    unit = *parsed;
  }
  const std::int32_t tz = optional_tz(doc, "tz_offset_min", 0);
  const std::int32_t author_tz = optional_tz(doc, "author_tz_offset_min", tz);
  r.committer_date = normalize_timestamp(required_int(doc, "committer_date"), unit, tz);
  r.author_date = normalize_timestamp(required_int(doc, "author_date"), unit, author_tz);

  r.author_id = canonical_committer(required_string(doc, "author", true));
  r.committer_id = canonical_committer(required_string(doc, "committer", true));
  r.message = required_string(doc, "message", true);

  if (auto it = doc.find("verified"); it != doc.end() && !it->is_null()) {
    if (!it->is_boolean()) malformed("key 'verified' must be a boolean");
    r.verified = it->get<bool>() ? Verified::yes : Verified::no;
  }
  if (auto it = doc.find("stars"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
      malformed("key 'stars' must be a non-negative integer");
    r.stars = it->get<std::uint64_t>();
  }
  return r;
}

CommitRecord parse_gitlog_record(std::string_view record, std::string_view repo_id) {
  while (!record.empty() && (record.front() == '\n' || record.front() == '\r')) record.remove_prefix(1);
  auto fields = split(record, kFieldSep);
  if (fields.size() < kGitlogFields)
    malformed("expected " + std::to_string(kGitlogFields) + " fields, got " +
              std::to_string(fields.size()));

  CommitRecord r;
  r.repo_id = std::string(repo_id);
  if (r.repo_id.empty()) malformed("gitlog input needs a repository id");
  r.hash = checked_commit_id(fields[0], "hash");

  std::vector<std::string> parents;
  for (auto p : split(fields[1], ' ')) {
    if (p.empty()) continue;
    parents.push_back(checked_commit_id(p, "parent"));
  }
  r.parents = checked_parents(std::move(parents), r.hash);

  auto committer_tz = parse_git_tz(fields[3]);
  if (!committer_tz) malformed("bad committer zone '" + std::string(fields[3]) + "'");
  auto author_tz = parse_git_tz(fields[5]);
  if (!author_tz) malformed("bad author zone '" + std::string(fields[5]) + "'");
  r.committer_date = Timestamp{parse_int_field(fields[2], "committer epoch"), *committer_tz};
  r.author_date = Timestamp{parse_int_field(fields[4], "author epoch"), *author_tz};
  r.committer_id = canonical_committer(fields[6]);
  r.author_id = canonical_committer(fields[7]);

  // The message is everything after the eighth separator.
  std::size_t offset = 0;
  for (std::size_t i = 0; i < kGitlogFields - 1; ++i) offset += fields[i].size() + 1;
  r.message = std::string(record.substr(offset));
  return r;
}

ParseResult parse_commit_stream(std::istream& in, InputFormat format, std::string_view gitlog_repo_id) {
  ParseResult out;
  if (format == InputFormat::ndjson)
    parse_ndjson_into(in, out);
  else
    parse_gitlog_into(in, gitlog_repo_id, out);
  return out;
}

ParseResult parse_commit_text(std::string_view text, InputFormat format, std::string_view gitlog_repo_id) {
  std::istringstream in{std::string(text)};
  return parse_commit_stream(in, format, gitlog_repo_id);
}

std::string to_ndjson_line(const CommitRecord& r) {
  ordered_json doc;
  doc["hash"] = r.hash;
  doc["repo"] = r.repo_id;
  doc["parents"] = r.parents;
  doc["author_date"] = r.author_date.epoch_seconds;
  doc["committer_date"] = r.committer_date.epoch_seconds;
  doc["date_unit"] = "s";
  doc["tz_offset_min"] = r.committer_date.tz_offset_minutes;
  if (r.author_date.tz_offset_minutes != r.committer_date.tz_offset_minutes)
    doc["author_tz_offset_min"] = r.author_date.tz_offset_minutes;
  doc["author"] = r.author_id;
  doc["committer"] = r.committer_id;
  doc["message"] = r.message;
  if (r.verified != Verified::unknown) doc["verified"] = r.verified == Verified::yes;
  if (r.stars) doc["stars"] = *r.stars;
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string to_ndjson(std::span<const CommitRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += to_ndjson_line(r);
    out += '\n';
  }
  return out;
}

DedupResult deduplicate(std::vector<CommitRecord> records) {
  DedupResult result;
  result.report.total_in = records.size();

  struct Seen {
    std::size_t kept_index;
    std::size_t occurrences;
    bool conflict;
  };
  std::unordered_map<std::string, Seen> seen;
  std::vector<std::string> first_order;
  seen.reserve(records.size());

  for (auto& r : records) {
    auto [it, inserted] = seen.try_emplace(r.hash, Seen{result.records.size(), 1, false});
    if (inserted) {
      first_order.push_back(r.hash);
      result.records.push_back(std::move(r));
      continue;
    }
    ++it->second.occurrences;
    if (result.records[it->second.kept_index].committer_date.epoch_seconds !=
        r.committer_date.epoch_seconds)
      it->second.conflict = true;
  }

  for (const auto& hash : first_order) {
    const Seen& s = seen.at(hash);
    if (s.occurrences > 1) result.report.duplicate_hashes.push_back({hash, s.occurrences});
    if (s.conflict) result.report.conflicts.push_back(hash);
  }
  result.report.unique_out = result.records.size();
  return result;
}

std::vector<Changeset> coalesce_changesets(std::vector<FileChange> changes, std::int64_t window_seconds) {
  if (window_seconds < 0) throw std::invalid_argument("coalescence window must be non-negative");
  for (const auto& c : changes) {
    if (c.repo_id != changes.front().repo_id)
      throw std::invalid_argument("coalesce_changesets: changes span repositories '" +
                                  changes.front().repo_id + "' and '" + c.repo_id + "'");
    if (c.path.empty()) throw std::invalid_argument("coalesce_changesets: empty path");
  }

  std::stable_sort(changes.begin(), changes.end(), [](const FileChange& a, const FileChange& b) {
    if (a.author_id != b.author_id) return a.author_id < b.author_id;
    return a.timestamp.epoch_seconds < b.timestamp.epoch_seconds;
  });

  std::vector<Changeset> out;
  for (auto& c : changes) {
    if (!out.empty() && out.back().author_id == c.author_id &&
        c.timestamp.epoch_seconds - out.back().end.epoch_seconds <= window_seconds) {
      out.back().end = c.timestamp;
      out.back().changes.push_back(std::move(c));
      continue;
    }
    Changeset cs;
    cs.repo_id = c.repo_id;
    cs.author_id = c.author_id;
    cs.start = c.timestamp;
    cs.end = c.timestamp;
    cs.changes.push_back(std::move(c));
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace timeaudit
