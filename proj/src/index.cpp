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

#include "polevent/index.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "polevent/error.hpp"
#include "polevent/fsutil.hpp"

namespace polevent::index {

namespace {

constexpr char kMagic[4] = {'P', 'E', 'V', 'I'};
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 8;
constexpr std::size_t kCrcSize = 4;

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) { put_le(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - off_; }

  template <class T>
  T le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[off_ + i])) << (8 * i);
    off_ += sizeof(T);
    return static_cast<T>(v);
  }

  float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(off_, n);
    off_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorKind::kFormat, "index file is truncated");
  }

  std::string_view bytes_;
  std::size_t off_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded slices.
  constexpr std::size_t kSlice = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kSlice) {
    auto n = std::min(kSlice, bytes.size() - off);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

bool hit_before(const RetrievalHit& a, const RetrievalHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.chunk_id < b.chunk_id;
}

void VectorIndex::upsert(const std::string& chunk_id, const embed::EmbeddingVector& v) {
  if (dim_ == 0) dim_ = v.dim();
  if (v.dim() != dim_) {
    throw Error(ErrorKind::kDim, "vector dim " + std::to_string(v.dim()) +
                                     " does not match index dim " + std::to_string(dim_));
  }
  auto values = v.values();
  if (auto it = pos_.find(chunk_id); it != pos_.end()) {
    std::copy(values.begin(), values.end(), data_.begin() + it->second * dim_);
  } else {
    pos_.emplace(chunk_id, ids_.size());
    ids_.push_back(chunk_id);
    data_.insert(data_.end(), values.begin(), values.end());
  }
  ++generation_;
}

std::span<const float> VectorIndex::vector(const std::string& chunk_id) const {
  auto it = pos_.find(chunk_id);
  if (it == pos_.end()) return {};
  return std::span<const float>(data_).subspan(it->second * dim_, dim_);
}

std::vector<RetrievalHit> VectorIndex::search(const embed::EmbeddingVector& query,
                                              std::size_t k) const {
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "k must be at least 1");
  if (ids_.empty()) return {};
  if (query.dim() != dim_) {
    throw Error(ErrorKind::kDim, "query dim " + std::to_string(query.dim()) +
                                     " does not match index dim " + std::to_string(dim_));
  }

  std::vector<double> scores(ids_.size());
  std::span<const float> all(data_);
  for (std::size_t i = 0; i < ids_.size(); ++i)
    scores[i] = embed::cosine(query.values(), all.subspan(i * dim_, dim_));

  std::vector<std::size_t> order(ids_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids_[a] < ids_[b];
  };
  std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), before);

  std::vector<RetrievalHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) hits.push_back({ids_[order[i]], scores[order[i]], {}, {}});
  return hits;
}

VectorIndex VectorIndex::refresh(
    const std::map<std::string, embed::EmbeddingVector>& new_entries) const {
  VectorIndex next(dim_);
  for (const auto& [id, v] : new_entries) next.upsert(id, v);
  next.generation_ = generation_ + 1;
  return next;
}

std::string VectorIndex::serialize() const {
  std::string out;
  out.reserve(kHeaderSize + ids_.size() * (2 + dim_ * 4 + 24) + kCrcSize);
  out.append(kMagic, sizeof kMagic);
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  put_le<std::uint64_t>(out, ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const auto& id = ids_[i];
    if (id.size() > 0xFFFF) throw Error(ErrorKind::kFormat, "chunk id longer than 65535 bytes");
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out += id;
    for (std::size_t j = 0; j < dim_; ++j) put_f32(out, data_[i * dim_ + j]);
  }
  put_le<std::uint32_t>(out, crc32_of(out));
  return out;
}

VectorIndex VectorIndex::deserialize(std::string_view bytes) {
  if (bytes.size() < kHeaderSize + kCrcSize)
    throw Error(ErrorKind::kFormat, "index file is truncated (" + std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw Error(ErrorKind::kFormat, "bad magic; not an index file");
  Reader head(bytes.substr(sizeof kMagic));
  if (auto version = head.le<std::uint16_t>(); version != kFormatVersion)
    throw Error(ErrorKind::kFormat, "unsupported index version " + std::to_string(version));

  auto payload = bytes.substr(0, bytes.size() - kCrcSize);
  Reader tail(bytes.substr(bytes.size() - kCrcSize));
  if (tail.le<std::uint32_t>() != crc32_of(payload))
    throw Error(ErrorKind::kFormat, "checksum mismatch; index file is corrupt or truncated");

  Reader r(payload);
  r.take(sizeof kMagic + sizeof(std::uint16_t));
  auto dim = r.le<std::uint32_t>();
  auto count = r.le<std::uint64_t>();
  if (count > 0 && dim == 0) throw Error(ErrorKind::kFormat, "non-empty index with dim 0");
  // Each entry takes at least 2 + 4*dim bytes; reject counts the file cannot hold.
  if (count > r.remaining() / (2 + 4 * static_cast<std::uint64_t>(dim)))
    throw Error(ErrorKind::kFormat, "entry count exceeds file size");

  VectorIndex idx(dim);
  std::vector<float> values(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto len = r.le<std::uint16_t>();
    std::string id(r.take(len));
    if (idx.contains(id)) throw Error(ErrorKind::kFormat, "duplicate chunk id '" + id + "'");
    for (auto& x : values) x = r.f32();
    try {
      idx.upsert(id, embed::EmbeddingVector::from_unit(values));
    } catch (const Error& e) {
      throw Error(ErrorKind::kFormat, "entry '" + id + "': " + e.what());
    }
  }
  if (r.remaining() != 0) throw Error(ErrorKind::kFormat, "trailing bytes after last entry");
  idx.generation_ = 1;
  return idx;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  fsutil::write_atomic(path, serialize());
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  return deserialize(fsutil::read_file(path));
}

ChunkStore::ChunkStore(std::vector<corpus::Chunk> chunks) : chunks_(std::move(chunks)) {
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    if (!pos_.emplace(chunks_[i].chunk_id, i).second)
      throw Error(ErrorKind::kFormat, "duplicate chunk id '" + chunks_[i].chunk_id + "'");
  }
}

const corpus::Chunk* ChunkStore::find(const std::string& chunk_id) const {
  auto it = pos_.find(chunk_id);
  return it == pos_.end() ? nullptr : &chunks_[it->second];
}

void ChunkStore::resolve(std::vector<RetrievalHit>& hits) const {
  for (auto& h : hits) {
    const auto* c = find(h.chunk_id);
    if (c == nullptr)
      throw Error(ErrorKind::kFormat, "chunk '" + h.chunk_id + "' missing from chunk store");
    h.text = c->text;
    h.doc_ref = c->doc_ref;
  }
}

void ChunkStore::save(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& c : chunks_) {
    out += nlohmann::json{{"chunk_id", c.chunk_id}, {"doc_ref", c.doc_ref}, {"text", c.text}}.dump();
    out += '\n';
  }
  fsutil::write_atomic(path, out);
}

ChunkStore ChunkStore::load(const std::filesystem::path& path) {
  std::istringstream in(fsutil::read_file(path));
  std::vector<corpus::Chunk> chunks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("chunk_id") ||
        !j["chunk_id"].is_string() || !j.contains("doc_ref") || !j["doc_ref"].is_string() ||
        !j.contains("text") || !j["text"].is_string()) {
      throw Error(ErrorKind::kFormat,
                  path.string() + ":" + std::to_string(line_no) + ": malformed chunk record");
    }
    chunks.push_back({j["chunk_id"].get<std::string>(), j["text"].get<std::string>(),
                      j["doc_ref"].get<std::string>()});
  }
  return ChunkStore(std::move(chunks));
}

}  // namespace polevent::index
