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

// Exact top-k cosine index over chunk vectors, its on-disk form, and the
// chunk text store that travels with it.
//
// Index file layout (little-endian):
//
//   "PEVI"            4 bytes magic
//   version           u16 (= 1)
//   dim               u32
//   count             u64
//   count x { id_len u16, id bytes (UTF-8), dim x f32 }
//   crc32             u32 over every preceding byte
//
// The chunk store is a JSON-lines sidecar of {chunk_id, doc_ref, text}.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "polevent/corpus.hpp"
#include "polevent/embed.hpp"

namespace polevent::index {

inline constexpr std::uint16_t kFormatVersion = 1;

struct RetrievalHit {
  std::string chunk_id;
  double score = 0.0;
  std::string text;     // filled by ChunkStore::resolve
  std::string doc_ref;  // filled by ChunkStore::resolve

  bool operator==(const RetrievalHit&) const = default;
};

// Score descending, then chunk_id ascending. Total order over distinct ids.
bool hit_before(const RetrievalHit& a, const RetrievalHit& b);

class VectorIndex {
 public:
  VectorIndex() = default;
  // Pins the dimension up front; otherwise the first upsert fixes it.
  explicit VectorIndex(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  std::uint64_t generation() const noexcept { return generation_; }

  // Insert or replace. Throws Error(kDim) on dimension mismatch.
  void upsert(const std::string& chunk_id, const embed::EmbeddingVector& v);

  bool contains(const std::string& chunk_id) const { return pos_.contains(chunk_id); }
  // Empty span when absent.
  std::span<const float> vector(const std::string& chunk_id) const;
  // In insertion order.
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  // Exact full scan. Hits come back without text; see ChunkStore::resolve.
  // An empty index yields no hits. Throws Error(kInvalidArgument) for k == 0
  // and Error(kDim) when the query dimension differs.
  std::vector<RetrievalHit> search(const embed::EmbeddingVector& query, std::size_t k) const;

  // Complete replacement index with this index's dim and a newer generation.
  VectorIndex refresh(const std::map<std::string, embed::EmbeddingVector>& new_entries) const;

  std::string serialize() const;
  // Throws Error(kFormat) for anything that is not a well-formed index file.
  static VectorIndex deserialize(std::string_view bytes);

  // Atomic (temp file + rename).
  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;  // row-major, dim_ floats per id
  std::unordered_map<std::string, std::size_t> pos_;
  std::uint64_t generation_ = 0;
};

class ChunkStore {
 public:
  ChunkStore() = default;
  explicit ChunkStore(std::vector<corpus::Chunk> chunks);

  const corpus::Chunk* find(const std::string& chunk_id) const;
  const std::vector<corpus::Chunk>& chunks() const noexcept { return chunks_; }
  std::size_t size() const noexcept { return chunks_.size(); }

  // Fills text and doc_ref on each hit. Throws Error(kFormat) for a hit
  // whose chunk is missing, which means index and sidecar disagree.
  void resolve(std::vector<RetrievalHit>& hits) const;

  void save(const std::filesystem::path& path) const;
  static ChunkStore load(const std::filesystem::path& path);

 private:
  std::vector<corpus::Chunk> chunks_;
  std::unordered_map<std::string, std::size_t> pos_;
};

// Shared handle for copy-on-swap refresh: readers grab an immutable
// snapshot and keep using it while a writer installs a replacement.
template <class T>
class SnapshotHandle {
 public:
  explicit SnapshotHandle(std::shared_ptr<const T> initial) : current_(std::move(initial)) {}

  std::shared_ptr<const T> snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  void swap(std::shared_ptr<const T> next) {
    std::shared_ptr<const T> old;
    {
      std::lock_guard lock(mu_);
      old = std::exchange(current_, std::move(next));
    }
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const T> current_;
};

}  // namespace polevent::index
