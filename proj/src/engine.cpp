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

#include "polevent/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "polevent/error.hpp"
#include "polevent/fsutil.hpp"
#include "polevent/text.hpp"

namespace polevent::engine {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::chrono::microseconds since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0);
}

json document_to_json(const corpus::Document& d) {
  return {
      {"doc_id", d.doc_id},
      {"headline", d.headline},
      {"body", d.body},
      {"author", d.author ? json(*d.author) : json()},
      {"date", text::format_iso_date(d.published)},
      {"category", d.category},
      {"link", d.source_link ? json(*d.source_link) : json()},
  };
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

corpus::Document document_from_json(const json& j) {
  corpus::Document d;
  d.doc_id = j.at("doc_id").get<std::string>();
  d.headline = j.at("headline").get<std::string>();
  d.body = j.at("body").get<std::string>();
  d.author = opt_string(j, "author");
  auto date = text::parse_iso_date(j.at("date").get<std::string>());
  if (!date) throw Error(ErrorKind::kFormat, "document " + d.doc_id + " has a bad date");
  d.published = *date;
  d.category = j.at("category").get<std::string>();
  d.source_link = opt_string(j, "link");
  return d;
}

bool is_corpus_file(const fs::path& p) {
  auto ext = p.extension().string();
  return ext == ".jsonl" || ext == ".json";
}

json timings_to_json(const StageTimings& t) {
  return {
      {"embed_us", t.embed.count()},       {"retrieve_us", t.retrieve.count()},
      {"prompt_us", t.prompt.count()},     {"complete_us", t.complete.count()},
      {"parse_us", t.parse.count()},
  };
}

}  // namespace

void EngineConfig::validate() const {
  if (k == 0) throw Error(ErrorKind::kConfig, "engine k must be at least 1");
  if (budget_chars < prompt::kMinBudgetChars)
    throw Error(ErrorKind::kConfig, "engine budget_chars must be at least " +
                                        std::to_string(prompt::kMinBudgetChars));
  if (chunk.max_chars < 64) throw Error(ErrorKind::kConfig, "chunk max_chars must be at least 64");
  filter.validate();
}

json IndexMeta::to_json() const {
  return {
      {"embedder",
       {{"kind", embedder.kind},
        {"dim", embedder.dim},
        {"version", embedder.version},
        {"model", embedder.model}}},
      {"generation", generation},
      {"documents", documents},
      {"chunks", chunks},
  };
}

IndexMeta IndexMeta::from_json(const json& j) {
  try {
    IndexMeta m;
    const auto& e = j.at("embedder");
    m.embedder.kind = e.at("kind").get<std::string>();
    m.embedder.dim = e.at("dim").get<std::size_t>();
    m.embedder.version = e.at("version").get<std::string>();
    m.embedder.model = e.value("model", std::string());
    m.generation = j.at("generation").get<std::uint64_t>();
    m.documents = j.at("documents").get<std::size_t>();
    m.chunks = j.at("chunks").get<std::size_t>();
    return m;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::kFormat, std::string("malformed index metadata: ") + ex.what());
  }
}

const corpus::Document* KnowledgeBase::document(const std::string& doc_id) const {
  auto it = documents.find(doc_id);
  return it == documents.end() ? nullptr : &it->second;
}

void KnowledgeBase::save(const fs::path& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());

  index.save(dir / kIndexFile);
  chunks.save(dir / kChunksFile);
  std::string docs;
  for (const auto& [id, d] : documents) docs += document_to_json(d).dump() + '\n';
  fsutil::write_atomic(dir / kDocsFile, docs);
  fsutil::write_atomic(dir / kMetaFile, meta.to_json().dump(2) + '\n');
}

KnowledgeBase KnowledgeBase::load(const fs::path& dir) {
  KnowledgeBase kb;
  auto meta_json = json::parse(fsutil::read_file(dir / kMetaFile), nullptr, false);
  if (meta_json.is_discarded())
    throw Error(ErrorKind::kFormat, (dir / kMetaFile).string() + " is not valid JSON");
  kb.meta = IndexMeta::from_json(meta_json);
  kb.index = index::VectorIndex::load(dir / kIndexFile);
  kb.chunks = index::ChunkStore::load(dir / kChunksFile);

  std::istringstream docs(fsutil::read_file(dir / kDocsFile));
  std::string line;
  while (std::getline(docs, line)) {
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw Error(ErrorKind::kFormat, "malformed line in " + (dir / kDocsFile).string());
    corpus::Document d;
    try {
      d = document_from_json(j);
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::kFormat, std::string("malformed document record: ") + ex.what());
    }
    auto id = d.doc_id;
    kb.documents.emplace(std::move(id), std::move(d));
  }

  if (kb.index.size() != kb.meta.chunks || kb.chunks.size() != kb.meta.chunks)
    throw Error(ErrorKind::kFormat, "index, chunk store and metadata disagree on chunk count");
  if (kb.documents.size() != kb.meta.documents)
    throw Error(ErrorKind::kFormat, "document store and metadata disagree on document count");
  if (!kb.index.empty() && kb.index.dim() != kb.meta.embedder.dim)
    throw Error(ErrorKind::kFormat, "index dim differs from the recorded embedder dim");
  for (const auto& id : kb.index.ids())
    if (kb.chunks.find(id) == nullptr)
      throw Error(ErrorKind::kFormat, "index entry " + id + " has no chunk text");
  return kb;
}

corpus::ParseResult read_corpus(const fs::path& path, const corpus::FieldMap& fields) {
  std::error_code ec;
  std::vector<fs::path> files;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path, ec))
      if (entry.is_regular_file() && is_corpus_file(entry.path())) files.push_back(entry.path());
    if (ec) throw Error(ErrorKind::kIo, "cannot list " + path.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }

  corpus::ParseResult merged;
  const bool tag_file = files.size() > 1 || fs::is_directory(path, ec);
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open corpus " + file.string());
    auto part = corpus::parse_jsonl_partial(in, fields);
    for (auto& r : part.rejects) {
      if (tag_file) r.reason = file.filename().string() + ": " + r.reason;
      merged.rejects.push_back(std::move(r));
    }
    for (auto& r : part.records) merged.records.push_back(std::move(r));
  }
  if (merged.records.empty())
    throw Error(ErrorKind::kEmptyCorpus,
                "corpus " + path.string() + " contains no well-formed records (" +
                    std::to_string(merged.rejects.size()) + " rejected lines)");
  return merged;
}

BuildResult build_knowledge_base(const fs::path& corpus_path, const EngineConfig& config,
                                 const embed::Embedder& embedder, const KnowledgeBase* previous) {
  config.validate();
  auto parsed = read_corpus(corpus_path, config.fields);
  auto normalized = corpus::normalize_filter(parsed.records, config.filter);

  BuildResult out;
  out.report.records_read = parsed.records.size() + parsed.rejects.size();
  out.report.rejects = std::move(parsed.rejects);
  for (auto& r : normalized.rejects) out.report.rejects.push_back(std::move(r));
  out.report.rejected = out.report.rejects.size();
  if (normalized.documents.empty())
    throw Error(ErrorKind::kEmptyCorpus,
                "no documents in " + corpus_path.string() + " pass the date and category filter");

  auto chunks = corpus::chunk_documents(normalized.documents, config.chunk);
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.text);
  auto vectors = embedder.embed(texts);
  if (vectors.size() != chunks.size())
    throw Error(ErrorKind::kProtocol, "embedder returned " + std::to_string(vectors.size()) +
                                          " vectors for " + std::to_string(chunks.size()) +
                                          " chunks");

  std::map<std::string, embed::EmbeddingVector> entries;
  for (std::size_t i = 0; i < chunks.size(); ++i) entries.emplace(chunks[i].chunk_id, vectors[i]);

  auto& kb = out.kb;
  kb.index = previous != nullptr ? previous->index.refresh(entries)
                                 : index::VectorIndex().refresh(entries);
  kb.meta.embedder = embedder.fingerprint();
  kb.meta.embedder.dim = kb.index.dim();
  kb.meta.generation = previous != nullptr ? previous->meta.generation + 1 : 1;
  kb.meta.documents = normalized.documents.size();
  kb.meta.chunks = chunks.size();
  kb.chunks = index::ChunkStore(std::move(chunks));
  for (auto& d : normalized.documents) {
    auto id = d.doc_id;
    kb.documents.emplace(std::move(id), std::move(d));
  }

  out.report.documents = kb.meta.documents;
  out.report.chunks = kb.meta.chunks;
  out.report.dim = kb.index.dim();
  return out;
}

BuildReport build(const fs::path& corpus_path, const fs::path& out_dir, const EngineConfig& config,
                  const embed::Embedder& embedder) {
  auto result = build_knowledge_base(corpus_path, config, embedder);
  result.kb.save(out_dir);
  std::ostringstream rejects;
  corpus::write_rejects(rejects, result.report.rejects);
  fsutil::write_atomic(out_dir / kRejectsFile, rejects.str());
  return std::move(result.report);
}

Answer answer_query(std::string_view question, const KnowledgeBase& kb,
                    const embed::Embedder& embedder, const llm::ChatModel& model,
                    const prompt::PromptTemplate& tmpl, const EngineConfig& config) {
  auto q = text::trim(question);
  if (q.empty()) throw Error(ErrorKind::kInvalidArgument, "question is empty");
  if (config.k == 0) throw Error(ErrorKind::kInvalidArgument, "k must be at least 1");
  if (kb.index.empty()) throw Error(ErrorKind::kQueryOnEmptyIndex, "the index holds no chunks");

  auto fp = embedder.fingerprint();
  const auto& built = kb.meta.embedder;
  if (fp.kind != built.kind || fp.version != built.version || fp.model != built.model ||
      (fp.dim != 0 && fp.dim != built.dim)) {
    throw Error(ErrorKind::kEmbedderMismatch,
                "index was built with embedder " + built.kind + "/" + built.version +
                    (built.model.empty() ? "" : "/" + built.model) + " dim " +
                    std::to_string(built.dim) + " but the query embedder is " + fp.kind + "/" +
                    fp.version + (fp.model.empty() ? "" : "/" + fp.model) + " dim " +
                    std::to_string(fp.dim));
  }

  Answer a;
  a.question = std::string(q);
  a.generation = kb.meta.generation;

  auto t0 = Clock::now();
  std::string qs(q);
  auto qv = embedder.embed(std::span<const std::string>(&qs, 1));
  if (qv.size() != 1) throw Error(ErrorKind::kProtocol, "embedder returned no query vector");
  a.timings.embed = since(t0);

  t0 = Clock::now();
  a.hits = kb.index.search(qv.front(), config.k);
  kb.chunks.resolve(a.hits);
  a.timings.retrieve = since(t0);

  t0 = Clock::now();
  auto assembled = prompt::render(tmpl, q, a.hits, config.budget_chars);
  a.context_ids = assembled.context_ids;
  a.timings.prompt = since(t0);

  t0 = Clock::now();
  auto response = model.complete(assembled);
  a.raw_text = response.text;
  a.timings.complete = since(t0);

  t0 = Clock::now();
  events::ExtractionResult parsed;
  try {
    parsed = events::parse_events(response.text);
  } catch (const ParseError& e) {
    a.warning = std::string("model output held no JSON: ") + e.what();
    a.timings.parse = since(t0);
    return a;
  }
  if (config.attribution) {
    std::span<const index::RetrievalHit> context(a.hits.data(), a.context_ids.size());
    parsed = events::attach_sources(std::move(parsed), context,
                                    [&kb](const std::string& id) { return kb.document(id); });
  }
  a.events = std::move(parsed.events);
  a.invalid = std::move(parsed.invalid);
  a.sources = std::move(parsed.sources);
  a.timings.parse = since(t0);
  return a;
}

json events_to_json(const std::vector<events::PoliticalEvent>& evs) {
  json arr = json::array();
  for (const auto& e : evs) arr.push_back(events::to_json(e));
  return arr;
}

json answer_to_json(const Answer& a, bool verbose) {
  json j = {{"question", a.question}, {"events", events_to_json(a.events)}};
  json sources = json::object();
  for (const auto& [id, s] : a.sources) {
    sources[id] = {{"chunk_id", s.chunk_id},
                   {"doc_id", s.doc_id},
                   {"headline", s.headline},
                   {"link", s.link ? json(*s.link) : json()}};
  }
  j["sources"] = std::move(sources);
  if (a.warning) j["warning"] = *a.warning;
  if (!verbose) return j;

  json hits = json::array();
  for (const auto& h : a.hits)
    hits.push_back({{"chunk_id", h.chunk_id}, {"score", h.score}, {"doc_ref", h.doc_ref},
                    {"text", h.text}});
  json invalid = json::array();
  for (const auto& inv : a.invalid) {
    json why = json::array();
    for (auto v : inv.violations) why.push_back(std::string(events::to_string(v)));
    invalid.push_back({{"object", inv.raw}, {"violations", why}});
  }
  j["hits"] = std::move(hits);
  j["context_ids"] = a.context_ids;
  j["invalid"] = std::move(invalid);
  j["raw_text"] = a.raw_text;
  j["generation"] = a.generation;
  j["timings"] = timings_to_json(a.timings);
  return j;
}

Engine::Engine(std::shared_ptr<const KnowledgeBase> kb, std::unique_ptr<embed::Embedder> embedder,
               std::unique_ptr<llm::ChatModel> model, prompt::PromptTemplate tmpl,
               EngineConfig config)
    : kb_(std::move(kb)),
      embedder_(std::move(embedder)),
      model_(std::move(model)),
      tmpl_(std::move(tmpl)),
      config_(std::move(config)) {
  config_.validate();
}

Answer Engine::answer(std::string_view question) const {
  auto kb = kb_.snapshot();
  return answer_query(question, *kb, *embedder_, *model_, tmpl_, config_);
}

void Engine::refresh(const fs::path& corpus_path) {
  auto current = kb_.snapshot();
  auto next = build_knowledge_base(corpus_path, config_, *embedder_, current.get());
  kb_.swap(std::make_shared<const KnowledgeBase>(std::move(next.kb)));
}

}  // namespace polevent::engine
