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

#include "polevent/corpus.hpp"

#include <istream>
#include <ostream>
#include <unordered_map>

#include "json.hpp"

#include "polevent/error.hpp"
#include "polevent/text.hpp"

namespace polevent::corpus {

using nlohmann::json;

namespace {

// Pulls an optional string field. Returns false when the field exists but
// holds something other than a string or null.
bool read_string(const json& obj, const std::string& key, std::string& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    out.clear();
    return true;
  }
  if (!it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_continuation(char c) {
  return (static_cast<unsigned char>(c) & 0xC0) == 0x80;
}

void split_text(std::string_view s, std::size_t max_chars,
                std::vector<std::string>& out) {
  s = text::trim(s);
  while (s.size() > max_chars) {
    std::size_t cut = 0;
    for (std::size_t p = max_chars; p >= 1; --p) {
      if (is_ws(s[p])) {
        cut = p;
        break;
      }
    }
    if (cut == 0) {
      // No whitespace inside the window: hard cut on a code point boundary.
      cut = max_chars;
      while (cut > 0 && is_continuation(s[cut])) --cut;
      if (cut == 0) cut = max_chars;
    }
    auto piece = text::trim(s.substr(0, cut));
    if (!piece.empty()) out.emplace_back(piece);
    s = text::trim(s.substr(cut));
  }
  if (!s.empty()) out.emplace_back(s);
}

}  // namespace

void CorpusFilter::validate() const {
  if (!date_from.ok() || !date_to.ok())
    throw Error(ErrorKind::kConfig, "corpus filter dates are not valid calendar dates");
  if (std::chrono::sys_days{date_from} > std::chrono::sys_days{date_to})
    throw Error(ErrorKind::kConfig, "corpus filter date_from is after date_to");
}

ParseResult parse_jsonl(std::istream& in, const FieldMap& fields) {
  auto result = parse_jsonl_partial(in, fields);
  if (result.records.empty()) {
    throw Error(ErrorKind::kEmptyCorpus,
                "corpus contains no well-formed records (" +
                    std::to_string(result.rejects.size()) + " rejected lines)");
  }
  return result;
}

ParseResult parse_jsonl_partial(std::istream& in, const FieldMap& fields) {
  if (!in.good()) throw Error(ErrorKind::kIo, "corpus stream is not readable");

  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;

    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) {
      result.rejects.push_back({line_no, "malformed JSON"});
      continue;
    }
    if (!obj.is_object()) {
      result.rejects.push_back({line_no, "line is not a JSON object"});
      continue;
    }

    RawRecord rec;
    rec.line = line_no;
    const std::pair<const std::string*, std::string*> slots[] = {
        {&fields.category, &rec.category},
        {&fields.headline, &rec.headline},
        {&fields.authors, &rec.authors},
        {&fields.link, &rec.link},
        {&fields.short_description, &rec.short_description},
        {&fields.date, &rec.date},
    };
    std::string bad_field;
    for (auto [key, dst] : slots) {
      if (!read_string(obj, *key, *dst)) {
        bad_field = *key;
        break;
      }
    }
    if (!bad_field.empty()) {
      result.rejects.push_back({line_no, "field '" + bad_field + "' is not a string"});
      continue;
    }
    if (text::trim(rec.headline).empty()) {
      result.rejects.push_back({line_no, "missing or empty headline"});
      continue;
    }
    if (text::trim(rec.date).empty()) {
      result.rejects.push_back({line_no, "missing date"});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "error while reading corpus stream");
  return result;
}

NormalizeResult normalize_filter(const std::vector<RawRecord>& records,
                                 const CorpusFilter& filter) {
  filter.validate();
  const std::chrono::sys_days from{filter.date_from}, to{filter.date_to};

  NormalizeResult result;
  std::unordered_map<std::string, int> seen_ids;
  for (const auto& rec : records) {
    auto date = text::parse_iso_date(rec.date);
    if (!date) {
      result.rejects.push_back({rec.line, "unparseable date '" + rec.date + "'"});
      continue;
    }
    auto headline = std::string(text::trim(rec.headline));
    if (headline.empty()) {
      result.rejects.push_back({rec.line, "missing or empty headline"});
      continue;
    }
    std::chrono::sys_days day{*date};
    if (day < from || day > to) continue;
    auto category = std::string(text::trim(rec.category));
    if (!filter.categories.empty()) {
      std::string upper = category;
      for (auto& c : upper)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      if (!filter.categories.contains(upper)) continue;
    }

    Document doc;
    doc.headline = std::move(headline);
    doc.body = std::string(text::trim(rec.short_description));
    auto author = text::trim(rec.authors);
    if (!author.empty() && text::ascii_lower(author) != "unnamed")
      doc.author = std::string(author);
    doc.published = *date;
    doc.category = std::move(category);
    auto link = text::trim(rec.link);
    if (!link.empty()) doc.source_link = std::string(link);

    std::string key = text::format_iso_date(doc.published);
    for (const std::string* part :
         {&doc.headline, &doc.body, &doc.category}) {
      key += '\x1f';
      key += *part;
    }
    key += '\x1f';
    key += doc.author.value_or("");
    key += '\x1f';
    key += doc.source_link.value_or("");
    std::string id = "d" + text::hex64(text::fnv1a64(key));
    int n = ++seen_ids[id];
    if (n > 1) id += "-" + std::to_string(n);
    doc.doc_id = std::move(id);
    result.documents.push_back(std::move(doc));
  }
  return result;
}

RawRecord to_raw(const Document& doc) {
  RawRecord rec;
  rec.category = doc.category;
  rec.headline = doc.headline;
  rec.authors = doc.author.value_or("");
  rec.link = doc.source_link.value_or("");
  rec.short_description = doc.body;
  rec.date = text::format_iso_date(doc.published);
  return rec;
}

void write_jsonl(std::ostream& out, const std::vector<Document>& docs,
                 const FieldMap& fields) {
  for (const auto& doc : docs) {
    auto rec = to_raw(doc);
    json obj = {
        {fields.category, rec.category},
        {fields.headline, rec.headline},
        {fields.authors, rec.authors},
        {fields.link, rec.link},
        {fields.short_description, rec.short_description},
        {fields.date, rec.date},
    };
    out << obj.dump() << '\n';
  }
}

std::vector<Chunk> chunk_documents(const std::vector<Document>& docs,
                                   const ChunkPolicy& policy) {
  if (policy.max_chars < 64)
    throw Error(ErrorKind::kInvalidArgument, "chunk max_chars must be at least 64");

  std::vector<Chunk> chunks;
  std::vector<std::string> pieces;
  for (const auto& doc : docs) {
    std::string full = doc.headline;
    if (!doc.body.empty()) {
      full += kChunkSeparator;
      full += doc.body;
    }
    pieces.clear();
    split_text(full, policy.max_chars, pieces);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      chunks.push_back(
          {doc.doc_id + "#" + std::to_string(i), std::move(pieces[i]), doc.doc_id});
    }
  }
  return chunks;
}

void write_rejects(std::ostream& out, const std::vector<Reject>& rejects) {
  for (const auto& r : rejects)
    out << json{{"line", r.line}, {"reason", r.reason}}.dump() << '\n';
}

}  // namespace polevent::corpus
