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

// Shared test scaffolding: scratch directories, shipped fixture paths and
// generated corpora.

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "polevent/events.hpp"

namespace fixtures {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

fs::path data_dir();
fs::path sample_corpus();
fs::path sample_gold();
fs::path sample_mock();

void write_text(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

// Each of the eight properties independently present, absent, empty or
// whitespace-only.
polevent::events::PoliticalEvent random_event(std::mt19937_64& rng);

// One JSON line in the default corpus layout.
std::string corpus_line(const std::string& headline, const std::string& date,
                        const std::string& author = "", const std::string& body = "",
                        const std::string& category = "POLITICS", const std::string& link = "");

// Political-sounding headlines drawn from a fixed vocabulary.
std::vector<std::string> distractor_headlines(std::size_t n, std::uint64_t seed);

// A corpus of n records where record i carries the unique token "evtNNN"
// in its headline and in seven of its eight gold slots (time is a distinct
// ISO date), a gold file asking one question per record, and a mock script
// answering with the gold event. 8 * n gold slots in total.
struct SyntheticSet {
  fs::path corpus;
  fs::path gold;
  fs::path mock;
  std::size_t slots = 0;
};
SyntheticSet write_synthetic(const fs::path& dir, std::size_t n, double corruption_rate,
                             std::uint64_t seed);

}  // namespace fixtures
