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

#include "polevent/evalharness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>

#include "polevent/embed.hpp"
#include "polevent/error.hpp"
#include "polevent/fsutil.hpp"
#include "polevent/text.hpp"

namespace polevent::eval {

using nlohmann::json;

namespace {

[[noreturn]] void gold_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kGoldFormat, where + ": " + what);
}

json parse_file(const std::filesystem::path& path, ErrorKind kind) {
  json j = json::parse(fsutil::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(kind, path.string() + " is not valid JSON");
  return j;
}

// Memoized local embeddings; nullopt marks a tokenless text.
class EmbeddingCache {
 public:
  const std::optional<embed::EmbeddingVector>& get(const std::string& s) {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    std::optional<embed::EmbeddingVector> v;
    if (!embed::tokenize(s).empty()) v = embed::embed_local(s);
    return cache_.emplace(s, std::move(v)).first->second;
  }

 private:
  std::map<std::string, std::optional<embed::EmbeddingVector>> cache_;
};

// Identical texts score exactly 1 regardless of float rounding; a
// tokenless text matches nothing else.
double similarity(EmbeddingCache& cache, const std::string& pred, const std::string& gold) {
  if (pred == gold) return 1.0;
  const auto& a = cache.get(pred);
  const auto& b = cache.get(gold);
  if (!a || !b) return 0.0;
  return embed::cosine(*a, *b);
}

double pair_score(EmbeddingCache& cache, const events::PoliticalEvent& g,
                  const events::PoliticalEvent& p) {
  double total = 0.0;
  for (auto prop : events::kProperties) {
    const auto& gv = g.get(prop);
    const auto& pv = p.get(prop);
    if (gv && pv) total += similarity(cache, *pv, *gv);
  }
  return total;
}

std::string clip(const std::string& s, std::size_t width) {
  if (s.size() <= width) return s;
  std::size_t cut = width - 3;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return s.substr(0, cut) + "...";
}

// Pads by bytes; multi-byte text comes out slightly narrow, which is fine
// for a log table.
std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

GoldSet parse_gold(const json& j) {
  if (!j.is_object()) gold_error("", "gold file must be a JSON object");
  if (!j.contains("items") || !j["items"].is_array()) gold_error("/items", "missing items array");
  if (j["items"].empty()) gold_error("/items", "items list is empty");

  GoldSet gold;
  for (std::size_t i = 0; i < j["items"].size(); ++i) {
    const auto& item = j["items"][i];
    const std::string where = "/items/" + std::to_string(i);
    if (!item.is_object()) gold_error(where, "item is not an object");
    if (!item.contains("question") || !item["question"].is_string() ||
        text::trim(item["question"].get<std::string>()).empty())
      gold_error(where + "/question", "missing or empty question");
    if (!item.contains("gold_events") || !item["gold_events"].is_array())
      gold_error(where + "/gold_events", "missing gold_events array");

    GoldItem out;
    out.question = std::string(text::trim(item["question"].get<std::string>()));
    for (std::size_t e = 0; e < item["gold_events"].size(); ++e) {
      const auto& ev = item["gold_events"][e];
      const std::string ev_where = where + "/gold_events/" + std::to_string(e);
      if (!ev.is_object()) gold_error(ev_where, "event is not an object");
      auto event = events::from_json(ev);
      event.sources.clear();
      auto violations = events::validate(event);
      if (!violations.empty()) {
        std::string why;
        for (auto v : violations) {
          if (!why.empty()) why += ", ";
          why += events::to_string(v);
        }
        gold_error(ev_where, "invalid gold event (" + why + ")");
      }
      if (event.filled_slots() == 0) gold_error(ev_where, "gold event has no filled slots");
      out.gold_events.push_back(std::move(event));
    }
    gold.items.push_back(std::move(out));
  }
  return gold;
}

GoldSet load_gold(const std::filesystem::path& path) {
  auto j = parse_file(path, ErrorKind::kGoldFormat);
  try {
    return parse_gold(j);
  } catch (const Error& e) {
    throw Error(ErrorKind::kGoldFormat, path.string() + ": " + e.what());
  }
}

std::vector<Prediction> parse_predictions(const json& j) {
  const json* arr = &j;
  if (j.is_object() && j.contains("answers")) arr = &j["answers"];
  if (!arr->is_array())
    throw Error(ErrorKind::kAlignment, "answers must be a JSON array of {question, events}");

  std::vector<Prediction> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto& a = (*arr)[i];
    if (!a.is_object() || !a.contains("question") || !a["question"].is_string())
      throw Error(ErrorKind::kAlignment, "answer " + std::to_string(i) + " has no question");
    Prediction p;
    p.question = std::string(text::trim(a["question"].get<std::string>()));
    if (a.contains("events") && a["events"].is_array())
      for (const auto& ev : a["events"])
        if (ev.is_object()) p.events.push_back(events::from_json(ev));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(parse_file(path, ErrorKind::kAlignment));
}

SlotMatch match_slot(std::string_view pred, std::string_view gold, double tau) {
  auto score = embed::cosine(embed::embed_local(pred), embed::embed_local(gold));
  if (pred == gold) score = 1.0;
  return {score, score >= tau};
}

EvalReport evaluate(const std::vector<Prediction>& predictions, const GoldSet& gold, double tau) {
  std::map<std::string, const Prediction*> by_question;
  for (const auto& p : predictions) {
    auto q = std::string(text::trim(p.question));
    if (!by_question.emplace(q, &p).second)
      throw Error(ErrorKind::kAlignment, "question answered twice: \"" + q + "\"");
  }
  std::map<std::string, std::size_t> gold_questions;
  for (std::size_t i = 0; i < gold.items.size(); ++i) {
    const auto& q = gold.items[i].question;
    if (!gold_questions.emplace(q, i).second)
      throw Error(ErrorKind::kAlignment, "gold question appears twice: \"" + q + "\"");
    if (!by_question.contains(q))
      throw Error(ErrorKind::kAlignment, "no answer for gold question \"" + q + "\"");
  }
  for (const auto& [q, p] : by_question)
    if (!gold_questions.contains(q))
      throw Error(ErrorKind::kAlignment, "answer for unknown question \"" + q + "\"");

  EvalReport report;
  report.tau = tau;
  EmbeddingCache cache;
  for (std::size_t i = 0; i < gold.items.size(); ++i) {
    const auto& item = gold.items[i];
    const auto& preds = by_question.at(item.question)->events;

    // (score, gold, pred); best score first, index order breaks ties.
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t g = 0; g < item.gold_events.size(); ++g)
      for (std::size_t p = 0; p < preds.size(); ++p)
        pairs.emplace_back(pair_score(cache, item.gold_events[g], preds[p]), g, p);
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });
    std::vector<std::optional<std::size_t>> paired(item.gold_events.size());
    std::vector<bool> used(preds.size(), false);
    for (const auto& [score, g, p] : pairs) {
      if (paired[g] || used[p]) continue;
      paired[g] = p;
      used[p] = true;
    }

    for (std::size_t g = 0; g < item.gold_events.size(); ++g) {
      const auto& ge = item.gold_events[g];
      for (auto prop : events::kProperties) {
        const auto& gv = ge.get(prop);
        if (!gv) continue;
        SlotRow row;
        row.item = i;
        row.event = g;
        row.slot = std::string(events::property_name(prop));
        row.gold = *gv;
        if (paired[g]) {
          const auto& pv = preds[*paired[g]].get(prop);
          if (pv) {
            row.predicted = *pv;
            row.score = similarity(cache, *pv, *gv);
            row.matched = *row.score >= tau;
          }
        }
        ++report.gold_slot_count;
        if (row.matched) ++report.matched_count;
        report.per_slot.push_back(std::move(row));
      }
    }
  }
  report.accuracy = report.gold_slot_count == 0
                        ? 0.0
                        : static_cast<double>(report.matched_count) /
                              static_cast<double>(report.gold_slot_count);
  return report;
}

json EvalReport::to_json() const {
  json rows = json::array();
  for (const auto& r : per_slot) {
    rows.push_back({
        {"item", r.item},
        {"event", r.event},
        {"slot", r.slot},
        {"gold", r.gold},
        {"predicted", r.predicted ? json(*r.predicted) : json()},
        {"score", r.score ? json(*r.score) : json()},
        {"matched", r.matched},
    });
  }
  return {
      {"per_slot", rows},           {"matched_count", matched_count},
      {"gold_slot_count", gold_slot_count}, {"accuracy", accuracy},
      {"tau", tau},
  };
}

void EvalReport::write_table(std::ostream& out, const GoldSet& gold) const {
  constexpr std::size_t kText = 30;
  out << pad("item", 5) << pad("slot", 11) << pad("gold", kText + 2) << pad("predicted", kText + 2)
      << pad("score", 8) << "ok\n";
  std::size_t last_item = static_cast<std::size_t>(-1);
  for (const auto& r : per_slot) {
    if (r.item != last_item && r.item < gold.items.size()) {
      out << "# " << clip(gold.items[r.item].question, 2 * kText) << '\n';
      last_item = r.item;
    }
    char score[16] = "-";
    if (r.score) std::snprintf(score, sizeof score, "%.3f", *r.score);
    out << pad(std::to_string(r.item), 5) << pad(r.slot, 11) << pad(clip(r.gold, kText), kText + 2)
        << pad(r.predicted ? clip(*r.predicted, kText) : "-", kText + 2) << pad(score, 8)
        << (r.matched ? "yes" : "no") << '\n';
  }
  out << "matched " << matched_count << " of " << gold_slot_count << " gold slots (tau " << tau
      << ")\n";
}

}  // namespace polevent::eval
