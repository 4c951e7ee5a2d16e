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

#include "fixtures.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fixtures {

using nlohmann::json;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "polevent-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path data_dir() { return POLEVENT_DATA_DIR; }
fs::path sample_corpus() { return data_dir() / "sample" / "corpus.jsonl"; }
fs::path sample_gold() { return data_dir() / "sample" / "gold.json"; }
fs::path sample_mock() { return data_dir() / "sample" / "mock.json"; }

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

polevent::events::PoliticalEvent random_event(std::mt19937_64& rng) {
  static const char* kValues[] = {"Senate", "FDA", "vetoes", "Governor", "2021-03-04", "Texas"};
  std::uniform_int_distribution<int> shape(0, 3);
  std::uniform_int_distribution<int> pick(0, 5);
  polevent::events::PoliticalEvent e;
  for (auto p : polevent::events::kProperties) {
    switch (shape(rng)) {
      case 0: break;
      case 1: e.get(p) = std::string(kValues[pick(rng)]); break;
      case 2: e.get(p) = std::string(); break;
      default: e.get(p) = std::string(" \t "); break;
    }
  }
  return e;
}

std::string corpus_line(const std::string& headline, const std::string& date,
                        const std::string& author, const std::string& body,
                        const std::string& category, const std::string& link) {
  return json{{"category", category},     {"headline", headline}, {"authors", author},
              {"link", link},             {"short_description", body},
              {"date", date}}
             .dump() +
         "\n";
}

std::vector<std::string> distractor_headlines(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> subjects = {
      "Lawmakers", "City council", "Parliament", "Mayor",     "State senator", "Cabinet",
      "Ministry",  "Committee",    "Coalition",  "Labor union", "County board", "Regulators"};
  static const std::vector<std::string> verbs = {
      "debates", "delays", "rejects", "endorses", "reviews", "funds",
      "questions", "expands", "postpones", "drafts", "audits", "defends"};
  static const std::vector<std::string> objects = {
      "transit budget",   "farm subsidies",  "housing plan",     "tax reform",
      "election rules",   "trade pact",      "energy grid",      "water rights",
      "pension overhaul", "border policy",   "rail upgrade",     "school lunch program",
      "broadband grants", "zoning changes",  "fishing quotas",   "port expansion"};
  static const std::vector<std::string> tails = {
      "after long session", "ahead of recess", "in close vote",    "despite objections",
      "under pressure",     "for second time", "with amendments", "before deadline"};
  std::mt19937_64 rng(seed);
  auto pick = [&rng](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(pick(subjects) + " " + pick(verbs) + " " + pick(objects) + " " + pick(tails));
  return out;
}

SyntheticSet write_synthetic(const fs::path& dir, std::size_t n, double corruption_rate,
                             std::uint64_t seed) {
  using namespace std::chrono;
  SyntheticSet set;
  set.corpus = dir / "synthetic.jsonl";
  set.gold = dir / "synthetic_gold.json";
  set.mock = dir / "synthetic_mock.json";

  std::string corpus;
  json items = json::array();
  json rules = json::array();
  const sys_days base{year{2021} / January / 1};
  for (std::size_t i = 0; i < n; ++i) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "evt%03zu", i);
    const std::string t = tag;
    year_month_day d{base + days(static_cast<int>(i))};
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));

    corpus += corpus_line("Agent " + t + " signs accord " + t + " with council " + t, date,
                          "Reporter " + t);
    json event = {
        {"actor", "agent " + t},          {"action", "signs accord " + t},
        {"recipient", "council " + t},    {"instrument", "treaty text " + t},
        {"reason", "dispute over " + t},  {"time", date},
        {"location", "capital " + t},     {"reporter", "Reporter " + t},
    };
    json gold_event = event;
    gold_event["sources"] = json::array();
    items.push_back({{"question", "What did agent " + t + " do?"},
                     {"gold_events", json::array({gold_event})}});
    rules.push_back({{"pattern", t}, {"question", t}, {"event", event}});
    set.slots += 8;
  }
  write_text(set.corpus, corpus);
  write_text(set.gold, json{{"items", items}}.dump(2));
  write_text(set.mock,
             json{{"rules", rules}, {"corruption_rate", corruption_rate}, {"seed", seed}}.dump(2));
  return set;
}

}  // namespace fixtures
