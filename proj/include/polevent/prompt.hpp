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

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polevent/index.hpp"

namespace polevent::prompt {

inline constexpr std::size_t kDefaultBudgetChars = 12000;
inline constexpr std::size_t kMinBudgetChars = 512;

inline constexpr std::string_view kSchemaPlaceholder = "{schema}";
inline constexpr std::string_view kContextPlaceholder = "{context}";
inline constexpr std::string_view kQuestionPlaceholder = "{question}";

class PromptTemplate {
 public:
  // Throws Error(kTemplate) unless system_text holds {schema} exactly once
  // and wrapper_text holds {context} and {question} exactly once each.
  static PromptTemplate make(std::string system_text, std::string wrapper_text);
  static PromptTemplate defaults();
  static PromptTemplate from_files(const std::filesystem::path& system_file,
                                   const std::filesystem::path& wrapper_file);

  const std::string& system_text() const noexcept { return system_; }
  const std::string& wrapper_text() const noexcept { return wrapper_; }

 private:
  PromptTemplate(std::string s, std::string w) : system_(std::move(s)), wrapper_(std::move(w)) {}
  std::string system_;
  std::string wrapper_;
};

// Output contract the model is asked to follow.
std::string schema_block();

struct ContextPassage {
  std::string tag;  // "S1", "S2", ...
  std::string chunk_id;
  std::string text;
};

struct AssembledPrompt {
  std::string system;
  std::string user;
  std::string question;
  // Included hits in score order; context_ids[n-1] is tagged S<n>.
  std::vector<std::string> context_ids;
  std::vector<ContextPassage> passages;
};

// Context entries look like "[S<n>: <chunk_id>] <text>". Hits are added in
// score order until the next one would push the user text past
// budget_chars; the included set is always a prefix of the sorted hits.
// Throws Error(kInvalidArgument) for an empty question or a budget below
// kMinBudgetChars, and Error(kBudget) when not even one hit fits.
AssembledPrompt render(const PromptTemplate& tmpl, std::string_view question,
                       std::span<const index::RetrievalHit> hits,
                       std::size_t budget_chars = kDefaultBudgetChars);

}  // namespace polevent::prompt
