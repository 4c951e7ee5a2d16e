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

// Chat completion over an OpenAI-compatible endpoint, plus a scripted mock
// that answers from canned events so the whole pipeline runs offline.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "polevent/events.hpp"
#include "polevent/prompt.hpp"

namespace polevent::llm {

enum class FinishReason { kStop, kLength, kOther };

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total_tokens = 0;
};

struct ChatResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
  std::optional<Usage> usage;
};

struct LlmConfig {
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::chrono::milliseconds timeout{60'000};
  std::string api_key_env = "POLEVENT_API_KEY";
  // Transient failures (connect errors, 429, 5xx) are retried this many
  // times, sleeping initial_backoff, 2x, 4x, ... between attempts.
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};

  void validate() const;
};

// POST <endpoint>/v1/chat/completions. Throws Error(kTransport) once retries
// are exhausted, EndpointError for any other 4xx (no retry),
// Error(kTimeout) when a request outlives config.timeout and
// Error(kProtocol) for an unusable response body. Error text never contains
// the bearer token.
ChatResponse complete(const prompt::AssembledPrompt& prompt, const LlmConfig& config);

inline constexpr std::string_view kCorruptedToken = "CORRUPTED";

struct MockRule {
  std::string pattern;                  // case-insensitive substring of the passage
  std::optional<std::string> question;  // case-insensitive substring of the question
  events::PoliticalEvent event;
};

struct MockScript {
  std::vector<MockRule> rules;
  double corruption_rate = 0.0;
  std::uint64_t seed = 0;

  // {"rules":[{"pattern","question"?,"event"}], "corruption_rate"?, "seed"?}
  // Throws Error(kConfig) on schema problems.
  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// (rule index, property) pairs replaced by kCorruptedToken. The universe is
// every filled slot of every rule; exactly floor(rate * total) of them are
// picked with a seeded generator, independent of any prompt.
std::vector<std::pair<std::size_t, events::Property>> corrupted_slots(const MockScript& script);

// For each passage (in S-tag order) the first rule whose pattern occurs in
// the passage text, and whose question filter (if any) occurs in the
// question, contributes its event tagged with that passage's S-tag.
// Output is always a JSON array; "[]" when nothing matches.
ChatResponse mock_complete(const prompt::AssembledPrompt& prompt, const MockScript& script);

class ChatModel {
 public:
  virtual ~ChatModel() = default;
  virtual ChatResponse complete(const prompt::AssembledPrompt& prompt) const = 0;
};

std::unique_ptr<ChatModel> make_remote_model(LlmConfig config);
std::unique_ptr<ChatModel> make_mock_model(MockScript script);

}  // namespace polevent::llm
