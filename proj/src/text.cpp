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

#include "polevent/text.hpp"

#include <algorithm>
#include <cstdio>

#include "polevent/error.hpp"

namespace polevent {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kEmptyText: return "EmptyText";
    case ErrorKind::kInvalidVector: return "InvalidVector";
    case ErrorKind::kDim: return "DimError";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kTemplate: return "TemplateError";
    case ErrorKind::kBudget: return "BudgetError";
    case ErrorKind::kTransport: return "TransportError";
    case ErrorKind::kEndpoint: return "EndpointError";
    case ErrorKind::kProtocol: return "ProtocolError";
    case ErrorKind::kTimeout: return "TimeoutError";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kAlignment: return "AlignmentError";
    case ErrorKind::kGoldFormat: return "GoldFormatError";
    case ErrorKind::kQueryOnEmptyIndex: return "QueryOnEmptyIndex";
    case ErrorKind::kEmbedderMismatch: return "EmbedderMismatch";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

EndpointError::EndpointError(int status, std::string body_excerpt)
    : Error(ErrorKind::kEndpoint,
            "endpoint returned HTTP " + std::to_string(status) +
                (body_excerpt.empty() ? "" : ": " + body_excerpt)),
      status_(status),
      body_excerpt_(std::move(body_excerpt)) {}

namespace text {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

bool icontains(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(),
                        needle.end(),
                        [](char a, char b) { return lower(a) == lower(b); });
  return it != haystack.end();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::optional<std::chrono::year_month_day> parse_iso_date(std::string_view s) {
  s = trim(s);
  if (s.size() > 10) {
    if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
    s = s.substr(0, 10);
  }
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = s.substr(0, 4), m = s.substr(5, 2), d = s.substr(8, 2);
  if (!digits(y) || !digits(m) || !digits(d)) return std::nullopt;
  std::chrono::year_month_day ymd{
      std::chrono::year{to_int(y)},
      std::chrono::month{static_cast<unsigned>(to_int(m))},
      std::chrono::day{static_cast<unsigned>(to_int(d))}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

std::string format_iso_date(std::chrono::year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

}  // namespace text
}  // namespace polevent
