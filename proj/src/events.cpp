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

#include "polevent/events.hpp"

#include <algorithm>
#include <chrono>

#include "polevent/error.hpp"
#include "polevent/text.hpp"

namespace polevent::events {

using nlohmann::json;

namespace {

// Candidate spans tried before giving up; bounds work on adversarial input.
constexpr int kMaxCandidates = 256;
constexpr std::size_t kMaxDepth = 64;

bool present(const std::optional<std::string>& v) {
  return v.has_value() && !text::trim(*v).empty();
}

// End offset (exclusive) of the bracket-balanced value opening at
// t[start], or npos when it never closes or closes with the wrong bracket.
std::size_t balanced_end(std::string_view t, std::size_t start) {
  std::string closers;
  bool in_string = false, escaped = false;
  for (std::size_t i = start; i < t.size(); ++i) {
    char c = t[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '[':
      case '{':
        closers.push_back(c == '[' ? ']' : '}');
        if (closers.size() > kMaxDepth) return std::string_view::npos;
        break;
      case ']':
      case '}':
        if (closers.empty() || closers.back() != c) return std::string_view::npos;
        closers.pop_back();
        if (closers.empty()) return i + 1;
        break;
      default:
        break;
    }
  }
  return std::string_view::npos;
}

// Drops commas that directly precede a closing bracket, outside strings.
std::string strip_trailing_commas(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_string = false, escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      out += c;
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && (s[j] == ' ' || s[j] == '\n' || s[j] == '\r' || s[j] == '\t')) ++j;
      if (j < s.size() && (s[j] == ']' || s[j] == '}')) continue;
    }
    out += c;
  }
  return out;
}

std::optional<json> locate_json(std::string_view t) {
  int tried = 0;
  for (std::size_t i = 0; i < t.size() && tried < kMaxCandidates; ++i) {
    if (t[i] != '[' && t[i] != '{') continue;
    ++tried;
    auto end = balanced_end(t, i);
    if (end == std::string_view::npos) continue;
    auto span = t.substr(i, end - i);
    json j = json::parse(span, nullptr, false);
    if (j.is_discarded()) j = json::parse(strip_trailing_commas(span), nullptr, false);
    if (j.is_discarded()) continue;
    if (j.is_array() || j.is_object()) return j;
  }
  return std::nullopt;
}

std::optional<std::string> slot_value(const json& v) {
  if (v.is_null()) return std::nullopt;
  std::string s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_array()) {
    for (const auto& item : v) {
      auto part = slot_value(item);
      if (!part) continue;
      if (!s.empty()) s += "; ";
      s += *part;
    }
  } else {
    s = v.dump();
  }
  auto t = text::trim(s);
  if (t.empty()) return std::nullopt;
  return std::string(t);
}

std::optional<unsigned> month_from_name(std::string_view w) {
  static constexpr std::string_view kMonths[] = {"january", "february", "march",     "april",
                                                 "may",     "june",     "july",      "august",
                                                 "september", "october", "november", "december"};
  auto lw = text::ascii_lower(w);
  if (!lw.empty() && lw.back() == '.') lw.pop_back();
  for (unsigned m = 0; m < 12; ++m) {
    if (lw == kMonths[m]) return m + 1;
    if (lw.size() >= 3 && kMonths[m].substr(0, lw.size()) == lw) return m + 1;
  }
  return std::nullopt;
}

std::optional<unsigned> number(std::string_view w, std::size_t max_len) {
  if (w.size() > 2) {
    auto suffix = text::ascii_lower(w.substr(w.size() - 2));
    if (suffix == "st" || suffix == "nd" || suffix == "rd" || suffix == "th")
      w.remove_suffix(2);
  }
  if (w.empty() || w.size() > max_len) return std::nullopt;
  unsigned v = 0;
  for (char c : w) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

std::optional<std::string> format_if_ok(unsigned y, unsigned m, unsigned d) {
  std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return text::format_iso_date(ymd);
}

}  // namespace

std::string_view property_name(Property p) {
  switch (p) {
    case Property::kActor: return "actor";
    case Property::kAction: return "action";
    case Property::kRecipient: return "recipient";
    case Property::kInstrument: return "instrument";
    case Property::kReason: return "reason";
    case Property::kTime: return "time";
    case Property::kLocation: return "location";
    case Property::kReporter: return "reporter";
  }
  return "";
}

const std::optional<std::string>& PoliticalEvent::get(Property p) const {
  switch (p) {
    case Property::kActor: return actor;
    case Property::kAction: return action;
    case Property::kRecipient: return recipient;
    case Property::kInstrument: return instrument;
    case Property::kReason: return reason;
    case Property::kTime: return time;
    case Property::kLocation: return location;
    case Property::kReporter: return reporter;
  }
  return actor;
}

std::optional<std::string>& PoliticalEvent::get(Property p) {
  return const_cast<std::optional<std::string>&>(std::as_const(*this).get(p));
}

std::size_t PoliticalEvent::filled_slots() const {
  return static_cast<std::size_t>(std::count_if(
      kProperties.begin(), kProperties.end(), [&](Property p) { return present(get(p)); }));
}

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::kMissingAction: return "MissingAction";
    case Violation::kMissingParticipant: return "MissingParticipant";
    case Violation::kUnknownSource: return "UnknownSource";
    case Violation::kMissingSource: return "MissingSource";
    case Violation::kNotAnObject: return "NotAnObject";
  }
  return "Violation";
}

std::vector<Violation> validate(const PoliticalEvent& e) {
  std::vector<Violation> out;
  if (!present(e.action)) out.push_back(Violation::kMissingAction);
  if (!present(e.actor) && !present(e.recipient)) out.push_back(Violation::kMissingParticipant);
  return out;
}

json to_json(const PoliticalEvent& e) {
  json j = json::object();
  for (auto p : kProperties) {
    const auto& v = e.get(p);
    j[std::string(property_name(p))] = v ? json(*v) : json(nullptr);
  }
  j["sources"] = e.sources;
  return j;
}

PoliticalEvent from_json(const json& obj) {
  PoliticalEvent e;
  if (!obj.is_object()) return e;
  for (const auto& [key, value] : obj.items()) {
    auto k = text::ascii_lower(key);
    if (k == "sources" || k == "source") {
      auto add = [&](const json& s) {
        std::string tag;
        if (s.is_string()) tag = normalize_source_tag(s.get<std::string>());
        else if (s.is_number_unsigned()) tag = "S" + std::to_string(s.get<unsigned long long>());
        if (!tag.empty()) e.sources.push_back(std::move(tag));
      };
      if (value.is_array()) {
        for (const auto& s : value) add(s);
      } else {
        add(value);
      }
      continue;
    }
    for (auto p : kProperties) {
      if (k != property_name(p)) continue;
      auto v = slot_value(value);
      if (v && p == Property::kTime) v = canonical_time(*v);
      e.get(p) = std::move(v);
    }
  }
  return e;
}

std::string canonical_time(std::string_view s) {
  s = text::trim(s);
  if (auto d = text::parse_iso_date(s)) return text::format_iso_date(*d);

  if (s.size() == 10 && (s[4] == '/' || s[4] == '.') && s[7] == s[4]) {
    auto y = number(s.substr(0, 4), 4), m = number(s.substr(5, 2), 2), d = number(s.substr(8, 2), 2);
    if (y && m && d)
      if (auto iso = format_if_ok(*y, *m, *d)) return *iso;
  }

  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != ',') ++j;
    if (j > i) words.push_back(s.substr(i, j - i));
    i = j;
  }
  if (words.size() == 3) {
    auto year = number(words[2], 4);
    if (year && words[2].size() == 4) {
      // "April 14, 2022"
      if (auto m = month_from_name(words[0]); m)
        if (auto d = number(words[1], 2))
          if (auto iso = format_if_ok(*year, *m, *d)) return *iso;
      // "14 April 2022"
      if (auto m = month_from_name(words[1]); m)
        if (auto d = number(words[0], 2))
          if (auto iso = format_if_ok(*year, *m, *d)) return *iso;
    }
  }
  return std::string(s);
}

std::string normalize_source_tag(std::string_view s) {
  auto t = text::trim(s);
  auto inner = t;
  if (inner.size() >= 2 && inner.front() == '[' && inner.back() == ']')
    inner = text::trim(inner.substr(1, inner.size() - 2));
  if (inner.size() >= 2 && (inner[0] == 'S' || inner[0] == 's')) {
    std::size_t j = 1;
    while (j < inner.size() && inner[j] >= '0' && inner[j] <= '9') ++j;
    if (j > 1 && (j == inner.size() || inner[j] == ':'))
      return "S" + std::string(inner.substr(1, j - 1));
  }
  return std::string(t);
}

ExtractionResult parse_events(std::string_view llm_text) {
  ExtractionResult result;
  result.raw_text = std::string(llm_text);
  try {
    auto located = locate_json(llm_text);
    if (!located) throw ParseError("no JSON array or object found in model output", result.raw_text);
    json items = located->is_array() ? std::move(*located) : json::array({std::move(*located)});
    for (auto& item : items) {
      if (!item.is_object()) {
        result.invalid.push_back({std::move(item), {Violation::kNotAnObject}});
        continue;
      }
      auto e = from_json(item);
      auto violations = validate(e);
      if (violations.empty()) {
        result.events.push_back(std::move(e));
      } else {
        result.invalid.push_back({std::move(item), std::move(violations)});
      }
    }
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed JSON in model output: ") + ex.what(), result.raw_text);
  }
  return result;
}

ExtractionResult attach_sources(ExtractionResult result,
                                std::span<const index::RetrievalHit> context,
                                const DocumentLookup& lookup) {
  std::vector<PoliticalEvent> kept;
  for (auto& e : result.events) {
    std::vector<std::string> resolved;
    bool unknown = false;
    for (const auto& src : e.sources) {
      const index::RetrievalHit* hit = nullptr;
      auto tag = normalize_source_tag(src);
      if (tag.size() >= 2 && tag[0] == 'S' &&
          std::all_of(tag.begin() + 1, tag.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        auto n = tag.size() > 10 ? 0ULL : std::stoull(tag.substr(1));
        if (n >= 1 && n <= context.size()) hit = &context[n - 1];
      } else {
        auto it = std::find_if(context.begin(), context.end(),
                               [&](const index::RetrievalHit& h) { return h.chunk_id == tag; });
        if (it != context.end()) hit = &*it;
      }
      if (hit == nullptr) {
        unknown = true;
        break;
      }
      if (std::find(resolved.begin(), resolved.end(), hit->chunk_id) == resolved.end())
        resolved.push_back(hit->chunk_id);
    }
    if (unknown || resolved.empty()) {
      result.invalid.push_back(
          {to_json(e), {unknown ? Violation::kUnknownSource : Violation::kMissingSource}});
      continue;
    }
    e.sources = std::move(resolved);
    for (const auto& chunk_id : e.sources) {
      if (result.sources.contains(chunk_id)) continue;
      const auto& hit = *std::find_if(context.begin(), context.end(),
                                      [&](const index::RetrievalHit& h) { return h.chunk_id == chunk_id; });
      SourceRef ref;
      ref.chunk_id = chunk_id;
      ref.doc_id = !hit.doc_ref.empty() ? hit.doc_ref : chunk_id.substr(0, chunk_id.find('#'));
      if (lookup) {
        if (const auto* doc = lookup(ref.doc_id)) {
          ref.headline = doc->headline;
          ref.link = doc->source_link;
        }
      }
      result.sources.emplace(chunk_id, std::move(ref));
    }
    kept.push_back(std::move(e));
  }
  result.events = std::move(kept);
  return result;
}

}  // namespace polevent::events
