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

// Text embeddings. Two producers share one vector type:
//
//  * a hashed bag-of-features embedder (unigrams + adjacent bigrams, FNV-1a
//    buckets, 1 + ln(count) weights) that needs nothing but the text and is
//    bit-for-bit reproducible; and
//  * a client for OpenAI-compatible /v1/embeddings endpoints.
//
// Every EmbeddingVector is unit-norm by construction, so cosine similarity
// reduces to a dot product.

#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polevent::embed {

inline constexpr double kNormTolerance = 1e-6;
inline constexpr std::size_t kDefaultLocalDim = 1024;

class EmbeddingVector {
 public:
  // Scales raw values to unit L2 norm. Throws Error(kInvalidVector) for an
  // empty, all-zero, or non-finite input.
  static EmbeddingVector normalize(std::vector<float> raw);

  // Adopts values that are already unit-norm (e.g. read back from disk).
  // Throws Error(kInvalidVector) when the norm is off by more than
  // kNormTolerance.
  static EmbeddingVector from_unit(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  explicit EmbeddingVector(std::vector<float> v) : values_(std::move(v)) {}
  std::vector<float> values_;
};

// Dot product of two unit vectors accumulated in double, clamped to [-1, 1].
// Throws Error(kDim) on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Same computation over raw unit-norm storage; the index scans with this.
double cosine(std::span<const float> a, std::span<const float> b);

// Lowercased alphanumeric runs; bytes >= 0x80 count as alphanumeric so that
// non-ASCII words survive as tokens.
std::vector<std::string> tokenize(std::string_view text);

// Throws Error(kEmptyText) when the text has no tokens.
EmbeddingVector embed_local(std::string_view text, std::size_t dim = kDefaultLocalDim);

enum class EmbedderKind { kLocal, kRemote };

std::string_view to_string(EmbedderKind kind);

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::kLocal;
  std::size_t dim = kDefaultLocalDim;  // remote: 0 means "whatever the endpoint returns"
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::chrono::milliseconds timeout{30'000};
  // Name of the environment variable holding the bearer token.
  std::string api_key_env = "POLEVENT_API_KEY";

  void validate() const;
};

// One vector per text, same order. Throws Error(kTransport) on connection
// failure, Error(kTimeout) when the call exceeds config.timeout,
// EndpointError on a non-2xx status and Error(kProtocol) on a malformed or
// mis-sized response.
std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts,
                                          const EmbedderConfig& config);

// Identity recorded next to an index so queries are embedded the same way
// the chunks were.
struct Fingerprint {
  std::string kind;
  std::size_t dim = 0;
  std::string version;
  std::string model;

  bool operator==(const Fingerprint&) const = default;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
  virtual Fingerprint fingerprint() const = 0;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace polevent::embed
