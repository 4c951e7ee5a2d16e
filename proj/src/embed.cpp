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

#include "polevent/embed.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

#include "http.hpp"
#include "polevent/error.hpp"
#include "polevent/text.hpp"

namespace polevent::embed {

using nlohmann::json;

namespace {

constexpr std::string_view kLocalVersion = "hashed-unigram-bigram-v1";

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

double norm_of(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

}  // namespace

EmbeddingVector EmbeddingVector::normalize(std::vector<float> raw) {
  if (raw.empty()) throw Error(ErrorKind::kInvalidVector, "empty vector");
  for (float x : raw)
    if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidVector, "non-finite vector component");
  double n = norm_of(raw);
  if (n == 0.0) throw Error(ErrorKind::kInvalidVector, "cannot normalize a zero vector");
  for (auto& x : raw) x = static_cast<float>(static_cast<double>(x) / n);
  // Float rounding can leave the norm a hair off; one more pass settles it.
  n = norm_of(raw);
  if (std::abs(n - 1.0) > kNormTolerance) {
    for (auto& x : raw) x = static_cast<float>(static_cast<double>(x) / n);
    n = norm_of(raw);
    if (std::abs(n - 1.0) > kNormTolerance)
      throw Error(ErrorKind::kInvalidVector, "vector could not be normalized");
  }
  return EmbeddingVector(std::move(raw));
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<float> values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidVector, "empty vector");
  for (float x : values)
    if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidVector, "non-finite vector component");
  if (std::abs(norm_of(values) - 1.0) > kNormTolerance)
    throw Error(ErrorKind::kInvalidVector, "vector is not unit-norm");
  return EmbeddingVector(std::move(values));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDim, "dimension mismatch: " + std::to_string(a.dim()) +
                                     " vs " + std::to_string(b.dim()));
  }
  return cosine(a.values(), b.values());
}

double cosine(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kDim, "dimension mismatch: " + std::to_string(x.size()) +
                                     " vs " + std::to_string(y.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    dot += static_cast<double>(x[i]) * static_cast<double>(y[i]);
  return std::clamp(dot, -1.0, 1.0);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

EmbeddingVector embed_local(std::string_view text, std::size_t dim) {
  if (dim == 0) throw Error(ErrorKind::kInvalidArgument, "embedding dim must be positive");
  auto tokens = tokenize(text);
  if (tokens.empty()) throw Error(ErrorKind::kEmptyText, "text has no tokens");

  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ++counts[tokens[i]];
    if (i + 1 < tokens.size()) ++counts[tokens[i] + " " + tokens[i + 1]];
  }
  std::vector<double> acc(dim, 0.0);
  for (const auto& [feature, count] : counts)
    acc[text::fnv1a64(feature) % dim] += 1.0 + std::log(static_cast<double>(count));

  double n = 0.0;
  for (double x : acc) n += x * x;
  n = std::sqrt(n);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / n);
  return EmbeddingVector::normalize(std::move(out));
}

std::string_view to_string(EmbedderKind kind) {
  return kind == EmbedderKind::kLocal ? "local" : "remote";
}

void EmbedderConfig::validate() const {
  if (kind == EmbedderKind::kRemote && (!endpoint || endpoint->empty()))
    throw Error(ErrorKind::kConfig, "remote embedder requires an endpoint");
  if (kind == EmbedderKind::kLocal && dim == 0)
    throw Error(ErrorKind::kConfig, "local embedder dim must be positive");
  if (timeout.count() <= 0) throw Error(ErrorKind::kConfig, "embedder timeout must be positive");
}

std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts,
                                          const EmbedderConfig& config) {
  if (config.kind != EmbedderKind::kRemote)
    throw Error(ErrorKind::kConfig, "embed_remote called with a local embedder config");
  config.validate();
  if (texts.empty()) return {};

  auto key = http::api_key_from_env(config.api_key_env);
  json req = {{"input", json(std::vector<std::string>(texts.begin(), texts.end()))}};
  if (config.model) req["model"] = *config.model;

  auto resp = http::post_json(*config.endpoint, "/v1/embeddings", req.dump(), key, config.timeout);
  if (resp.status < 200 || resp.status >= 300)
    throw EndpointError(resp.status, http::excerpt(resp.body, key));

  json body = json::parse(resp.body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || !body.contains("data") ||
      !body["data"].is_array())
    throw Error(ErrorKind::kProtocol, "embeddings response lacks a data array");
  const auto& data = body["data"];
  if (data.size() != texts.size()) {
    throw Error(ErrorKind::kProtocol, "embeddings response has " +
                                          std::to_string(data.size()) + " vectors for " +
                                          std::to_string(texts.size()) + " inputs");
  }

  std::vector<std::optional<EmbeddingVector>> slots(texts.size());
  for (std::size_t pos = 0; pos < data.size(); ++pos) {
    const auto& item = data[pos];
    if (!item.is_object() || !item.contains("embedding") || !item["embedding"].is_array())
      throw Error(ErrorKind::kProtocol, "embeddings item lacks an embedding array");
    std::size_t idx = pos;
    if (item.contains("index")) {
      if (!item["index"].is_number_unsigned())
        throw Error(ErrorKind::kProtocol, "embeddings item index is not an unsigned integer");
      idx = item["index"].get<std::size_t>();
    }
    if (idx >= slots.size() || slots[idx])
      throw Error(ErrorKind::kProtocol, "embeddings item index out of range or repeated");
    std::vector<float> values;
    values.reserve(item["embedding"].size());
    for (const auto& x : item["embedding"]) {
      if (!x.is_number()) throw Error(ErrorKind::kProtocol, "non-numeric embedding component");
      values.push_back(x.get<float>());
    }
    if (config.dim != 0 && values.size() != config.dim) {
      throw Error(ErrorKind::kDim, "endpoint returned dim " + std::to_string(values.size()) +
                                       ", expected " + std::to_string(config.dim));
    }
    try {
      slots[idx] = EmbeddingVector::normalize(std::move(values));
    } catch (const Error& e) {
      throw Error(ErrorKind::kProtocol, std::string("bad embedding from endpoint: ") + e.what());
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

class LocalEmbedder final : public Embedder {
 public:
  explicit LocalEmbedder(std::size_t dim) : dim_(dim) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_local(t, dim_));
    return out;
  }

  Fingerprint fingerprint() const override {
    return {"local", dim_, std::string(kLocalVersion), ""};
  }

 private:
  std::size_t dim_;
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderConfig config) : config_(std::move(config)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    // Keep request bodies bounded on large corpora.
    constexpr std::size_t kBatch = 64;
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); i += kBatch) {
      auto batch = embed_remote(texts.subspan(i, std::min(kBatch, texts.size() - i)), config_);
      for (auto& v : batch) out.push_back(std::move(v));
    }
    return out;
  }

  Fingerprint fingerprint() const override {
    return {"remote", config_.dim, "openai-embeddings-v1", config_.model.value_or("")};
  }

 private:
  EmbedderConfig config_;
};

}  // namespace

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  config.validate();
  if (config.kind == EmbedderKind::kLocal) return std::make_unique<LocalEmbedder>(config.dim);
  return std::make_unique<RemoteEmbedder>(config);
}

}  // namespace polevent::embed
