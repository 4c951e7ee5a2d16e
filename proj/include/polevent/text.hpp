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

// Small locale-independent string helpers shared across modules.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace polevent::text {

std::string_view trim(std::string_view s);

std::string ascii_lower(std::string_view s);

// Case-insensitive (ASCII only) substring test.
bool icontains(std::string_view haystack, std::string_view needle);

// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t v);

// Strict calendar date: "YYYY-MM-DD", optionally followed by a time part
// introduced by 'T' or ' '. Rejects impossible dates such as 2021-02-30.
std::optional<std::chrono::year_month_day> parse_iso_date(std::string_view s);

std::string format_iso_date(std::chrono::year_month_day d);

}  // namespace polevent::text
