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

// End-to-end pipeline: corpus -> chunks -> vectors -> index on disk, and
// question -> retrieve -> prompt -> model -> parse -> attribute.
//
// An index directory holds:
//   index.pevi     vectors (binary, see index.hpp)
//   chunks.jsonl   {chunk_id, doc_ref, text}
//   docs.jsonl     document metadata for attribution
//   meta.json      embedder fingerprint, generation and counts
//   rejects.jsonl  ingestion rejects {line, reason}

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "polevent/corpus.hpp"
#include "polevent/embed.hpp"
#include "polevent/events.hpp"
#include "polevent/index.hpp"
#include "polevent/llm.hpp"
#include "polevent/prompt.hpp"

namespace polevent::engine {

inline constexpr std::string_view kIndexFile = "index.pevi";
inline constexpr std::string_view kChunksFile = "chunks.jsonl";
inline constexpr std::string_view kDocsFile = "docs.jsonl";
inline constexpr std::string_view kMetaFile = "meta.json";
inline constexpr std::string_view kRejectsFile = "rejects.jsonl";

struct EngineConfig {
  std::size_t k = 5;
  std::size_t budget_chars = prompt::kDefaultBudgetChars;
  bool attribution = true;
  corpus::FieldMap fields;
  corpus::CorpusFilter filter;
  corpus::ChunkPolicy chunk;

  void validate() const;
};

struct IndexMeta {
  embed::Fingerprint embedder;
  std::uint64_t generation = 1;
  std::size_t documents = 0;
  std::size_t chunks = 0;

  nlohmann::json to_json() const;
  static IndexMeta from_json(const nlohmann::json& j);
};

struct KnowledgeBase {
  index::VectorIndex index;
  index::ChunkStore chunks;
  std::map<std::string, corpus::Document> documents;
  IndexMeta meta;

  const corpus::Document* document(const std::string& doc_id) const;

  // Writes every file atomically, meta.json last.
  void save(const std::filesystem::path& dir) const;
  // Throws Error(kIo) for missing files and Error(kFormat) when the files
  // disagree with each other.
  static KnowledgeBase load(const std::filesystem::path& dir);
};

struct BuildReport {
  std::size_t records_read = 0;
  std::size_t rejected = 0;
  std::size_t documents = 0;
  std::size_t chunks = 0;
  std::size_t dim = 0;
  std::vector<corpus::Reject> rejects;
};

struct BuildResult {
  KnowledgeBase kb;
  BuildReport report;
};

// Reads a JSON-lines file, or every *.jsonl / *.json file of a directory in
// name order. Throws Error(kIo) when the path is unreadable and
// Error(kEmptyCorpus) when nothing survives parsing and filtering.
corpus::ParseResult read_corpus(const std::filesystem::path& path, const corpus::FieldMap& fields);

// In-memory build. `previous`, when given, makes the result a refresh of it:
// same dim, next generation.
BuildResult build_knowledge_base(const std::filesystem::path& corpus_path,
                                 const EngineConfig& config, const embed::Embedder& embedder,
                                 const KnowledgeBase* previous = nullptr);

// Builds and writes an index directory. Nothing is written when ingestion
// or embedding fails.
BuildReport build(const std::filesystem::path& corpus_path, const std::filesystem::path& out_dir,
                  const EngineConfig& config, const embed::Embedder& embedder);

struct StageTimings {
  std::chrono::microseconds embed{0};
  std::chrono::microseconds retrieve{0};
  std::chrono::microseconds prompt{0};
  std::chrono::microseconds complete{0};
  std::chrono::microseconds parse{0};
};

struct Answer {
  std::string question;
  std::vector<events::PoliticalEvent> events;
  std::vector<index::RetrievalHit> hits;
  std::vector<std::string> context_ids;
  std::string raw_text;
  std::vector<events::InvalidObject> invalid;
  std::map<std::string, events::SourceRef> sources;
  // Set when the model output held no JSON; events are then empty.
  std::optional<std::string> warning;
  std::uint64_t generation = 0;
  StageTimings timings;
};

// Throws Error(kQueryOnEmptyIndex), Error(kEmbedderMismatch) when the
// embedder differs from the one that built the index, and whatever the
// model client throws. A ParseError from the model output is reported in
// Answer::warning instead.
Answer answer_query(std::string_view question, const KnowledgeBase& kb,
                    const embed::Embedder& embedder, const llm::ChatModel& model,
                    const prompt::PromptTemplate& tmpl, const EngineConfig& config);

nlohmann::json answer_to_json(const Answer& a, bool verbose);
// Canonical event array, as printed by `polevent query`.
nlohmann::json events_to_json(const std::vector<events::PoliticalEvent>& events);

// Owns the moving parts and a swappable knowledge base. answer() may run
// from many threads while refresh() installs a new generation.
class Engine {
 public:
  Engine(std::shared_ptr<const KnowledgeBase> kb, std::unique_ptr<embed::Embedder> embedder,
         std::unique_ptr<llm::ChatModel> model, prompt::PromptTemplate tmpl, EngineConfig config);

  Answer answer(std::string_view question) const;

  // Rebuilds from a replacement corpus off to the side, then swaps.
  void refresh(const std::filesystem::path& corpus_path);
  void install(std::shared_ptr<const KnowledgeBase> kb) { kb_.swap(std::move(kb)); }

  std::shared_ptr<const KnowledgeBase> snapshot() const { return kb_.snapshot(); }

 private:
  index::SnapshotHandle<KnowledgeBase> kb_;
  std::unique_ptr<embed::Embedder> embedder_;
  std::unique_ptr<llm::ChatModel> model_;
  prompt::PromptTemplate tmpl_;
  EngineConfig config_;
};

}  // namespace polevent::engine
