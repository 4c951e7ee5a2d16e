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

// Scores extracted events against a gold set, slot by slot.
//
// accuracy = matched gold slots / non-null gold slots. A gold slot matches
// when the paired prediction fills the same slot with text whose local
// embedding has cosine >= tau against the gold text.

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "polevent/events.hpp"

namespace polevent::eval {

inline constexpr double kDefaultTau = 0.8;

struct GoldItem {
  std::string question;
  std::vector<events::PoliticalEvent> gold_events;
};

struct GoldSet {
  std::vector<GoldItem> items;
};

// {"items":[{"question": "...", "gold_events":[<event>...]}...]}
// Throws Error(kGoldFormat) naming the JSON pointer of the offending value,
// e.g. "/items/3/gold_events/0: missing action".
GoldSet parse_gold(const nlohmann::json& j);
GoldSet load_gold(const std::filesystem::path& path);

struct Prediction {
  std::string question;
  std::vector<events::PoliticalEvent> events;
};

// A JSON array of {"question", "events"} objects (the shape `polevent query
// --json` prints), or {"answers": [...]} around it.
std::vector<Prediction> parse_predictions(const nlohmann::json& j);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

struct SlotMatch {
  double score = 0.0;
  bool matched = false;
};

// Cosine of the local embeddings. Throws Error(kEmptyText) when either text
// has no tokens.
SlotMatch match_slot(std::string_view pred, std::string_view gold, double tau = kDefaultTau);

struct SlotRow {
  std::size_t item = 0;   // index into GoldSet::items
  std::size_t event = 0;  // index into gold_events
  std::string slot;
  std::string gold;
  std::optional<std::string> predicted;
  std::optional<double> score;
  bool matched = false;
};

struct EvalReport {
  std::vector<SlotRow> per_slot;
  std::size_t matched_count = 0;
  std::size_t gold_slot_count = 0;
  double accuracy = 0.0;
  double tau = kDefaultTau;

  nlohmann::json to_json() const;
  // Fixed-width text table, one row per gold slot, then the slot counts.
  void write_table(std::ostream& out, const GoldSet& gold) const;
};

// Predictions are aligned to gold items by trimmed question text. Throws
// Error(kAlignment) naming the question when a gold item has no prediction,
// a prediction has no gold item, or a question appears twice. Within an
// item, (gold, predicted) pairs are taken greedily by descending total slot
// similarity; each predicted event pairs with at most one gold event.
EvalReport evaluate(const std::vector<Prediction>& predictions, const GoldSet& gold,
                    double tau = kDefaultTau);

}  // namespace polevent::eval
