// Copyright 2026 The Polevent Authors.
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

// News corpus ingestion: JSON-lines parsing, date/category filtering and
// chunking into indexable text units.
//
// Input records follow the News Category Dataset layout by default
// (category, headline, authors, link, short_description, date), but the
// field names are configurable because they vary between releases.

#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace polevent::corpus {

struct FieldMap {
  std::string category = "category";
  std::string headline = "headline";
  std::string authors = "authors";
  std::string link = "link";
  std::string short_description = "short_description";
  std::string date = "date";
};

struct RawRecord {
  std::string category;
  std::string headline;
  std::string authors;
  std::string link;
  std::string short_description;
  std::string date;
  std::size_t line = 0;  // 1-based source line, 0 when synthesized

  bool operator==(const RawRecord&) const = default;
};

// A line or record that did not make it through ingestion.
struct Reject {
  std::size_t line = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<Reject> rejects;
};

struct Document {
  std::string doc_id;
  std::string headline;
  std::string body;
  std::optional<std::string> author;
  std::chrono::year_month_day published;
  std::string category;
  std::optional<std::string> source_link;

  bool operator==(const Document&) const = default;
};

struct CorpusFilter {
  std::chrono::year_month_day date_from{std::chrono::year{2020},
                                        std::chrono::January, std::chrono::day{1}};
  std::chrono::year_month_day date_to{std::chrono::year{2022},
                                      std::chrono::December, std::chrono::day{31}};
  // Upper-cased category names; empty means every category passes.
  std::set<std::string> categories{"POLITICS"};

  // Throws Error(kConfig) when date_from > date_to.
  void validate() const;
};

struct NormalizeResult {
  std::vector<Document> documents;
  std::vector<Reject> rejects;
};

struct ChunkPolicy {
  std::size_t max_chars = 512;  // measured in UTF-8 bytes
};

struct Chunk {
  std::string chunk_id;
  std::string text;
  std::string doc_ref;

  bool operator==(const Chunk&) const = default;
};

// Separator placed between headline and body in chunk text.
inline constexpr std::string_view kChunkSeparator = " \xE2\x80\x94 ";

// One RawRecord per well-formed line in file order. Malformed lines land in
// rejects; whitespace-only lines are skipped silently.
// Throws Error(kIo) on an unreadable stream and Error(kEmptyCorpus) when no
// line is well formed.
ParseResult parse_jsonl(std::istream& in, const FieldMap& fields = {});

// Same as parse_jsonl without the EmptyCorpus check, for callers that merge
// several files.
ParseResult parse_jsonl_partial(std::istream& in, const FieldMap& fields = {});

// Keeps records inside the filter window and category set, canonicalizes
// dates to ISO-8601, maps "Unnamed"/empty authors to none, and assigns
// content-derived doc ids (stable across rebuilds; duplicates get "-2", ...).
NormalizeResult normalize_filter(const std::vector<RawRecord>& records,
                                 const CorpusFilter& filter);

// Inverse of normalize_filter for a single document, used for re-filtering
// and serialization.
RawRecord to_raw(const Document& doc);

// Writes documents as JSON lines using the given field names.
void write_jsonl(std::ostream& out, const std::vector<Document>& docs,
                 const FieldMap& fields = {});

// Throws Error(kInvalidArgument) when max_chars < 64.
std::vector<Chunk> chunk_documents(const std::vector<Document>& docs,
                                   const ChunkPolicy& policy);

// Rejects report: one {"line":..,"reason":..} object per line.
void write_rejects(std::ostream& out, const std::vector<Reject>& rejects);

}  // namespace polevent::corpus
