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

#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace oracle {

long double dot(const std::vector<float>& a, const std::vector<float>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

std::vector<Scored> naive_top_k(const std::vector<std::pair<std::string, std::vector<float>>>& entries,
                                const std::vector<float>& query, std::size_t k) {
  std::vector<Scored> all;
  for (const auto& [id, v] : entries) all.push_back({id, dot(v, query)});
  std::sort(all.begin(), all.end(), [](const Scored& x, const Scored& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.id < y.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> embed(std::string_view text, std::size_t dim) {
  // Tokens: maximal runs of [A-Za-z0-9] or non-ASCII bytes, lowercased.
  std::vector<std::string> toks;
  std::size_t i = 0;
  auto token_char = [](unsigned char c) { return c >= 0x80 || std::isalnum(c); };
  while (i < text.size()) {
    while (i < text.size() && !token_char(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && token_char(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string t(text.substr(i, j - i));
      for (auto& c : t)
        if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(c));
      toks.push_back(t);
    }
    i = j;
  }
  if (toks.empty()) return {};

  std::unordered_map<std::string, long double> count;
  for (std::size_t t = 0; t < toks.size(); ++t) count[toks[t]] += 1;
  for (std::size_t t = 0; t + 1 < toks.size(); ++t) count[toks[t] + ' ' + toks[t + 1]] += 1;

  std::vector<long double> v(dim, 0);
  for (const auto& [f, c] : count) v[fnv1a64(f) % dim] += 1 + std::log(c);
  long double n = 0;
  for (auto x : v) n += x * x;
  n = std::sqrt(n);
  std::vector<double> out(dim);
  for (std::size_t d = 0; d < dim; ++d) out[d] = static_cast<double>(v[d] / n);
  return out;
}

long double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return s / std::sqrt(na * nb);
}

std::uint32_t crc32(std::string_view bytes) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (char ch : bytes) {
    crc ^= static_cast<unsigned char>(ch);
    for (int b = 0; b < 8; ++b) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0;
  for (auto& x : v) {
    x = g(rng);
    n += x * x;
  }
  n = std::sqrt(n);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / n);
  return out;
}

}  // namespace oracle
