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

#include "polevent/llm.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "http.hpp"
#include "polevent/error.hpp"
#include "polevent/fsutil.hpp"
#include "polevent/text.hpp"

namespace polevent::llm {

using nlohmann::json;

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

ChatResponse parse_chat_response(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorKind::kProtocol, "chat response is not a JSON object");
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw Error(ErrorKind::kProtocol, "chat response has no choices");
  const auto& choice = j["choices"][0];
  if (!choice.is_object()) throw Error(ErrorKind::kProtocol, "chat choice is not an object");

  ChatResponse out;
  std::string finish = choice.value("finish_reason", json()).is_string()
                           ? choice["finish_reason"].get<std::string>()
                           : "stop";
  out.finish_reason = finish == "stop"     ? FinishReason::kStop
                      : finish == "length" ? FinishReason::kLength
                                           : FinishReason::kOther;

  const json* content = nullptr;
  if (choice.contains("message") && choice["message"].is_object() &&
      choice["message"].contains("content"))
    content = &choice["message"]["content"];
  if (content != nullptr && content->is_string()) {
    out.text = content->get<std::string>();
  } else if (out.finish_reason == FinishReason::kStop) {
    throw Error(ErrorKind::kProtocol, "chat response lacks choices[0].message.content");
  }

  if (j.contains("usage") && j["usage"].is_object()) {
    const auto& u = j["usage"];
    Usage usage;
    auto num = [&](const char* key) {
      return u.contains(key) && u[key].is_number_integer() ? u[key].get<std::int64_t>() : 0;
    };
    usage.prompt_tokens = num("prompt_tokens");
    usage.completion_tokens = num("completion_tokens");
    usage.total_tokens = num("total_tokens");
    out.usage = usage;
  }
  return out;
}

// Uniform draw in [0, n) that does not depend on the standard library's
// distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace

void LlmConfig::validate() const {
  if (endpoint.empty()) throw Error(ErrorKind::kConfig, "llm endpoint is not configured");
  if (!(temperature >= 0.0)) throw Error(ErrorKind::kConfig, "llm temperature must be >= 0");
  if (timeout.count() <= 0) throw Error(ErrorKind::kConfig, "llm timeout must be positive");
  if (max_tokens <= 0) throw Error(ErrorKind::kConfig, "llm max_tokens must be positive");
  if (max_retries < 0) throw Error(ErrorKind::kConfig, "llm max_retries must be >= 0");
}

ChatResponse complete(const prompt::AssembledPrompt& prompt, const LlmConfig& config) {
  config.validate();
  auto key = http::api_key_from_env(config.api_key_env);
  json req = {
      {"model", config.model},
      {"temperature", config.temperature},
      {"max_tokens", config.max_tokens},
      {"messages", json::array({{{"role", "system"}, {"content", prompt.system}},
                                {{"role", "user"}, {"content", prompt.user}}})},
  };
  const std::string body = req.dump();

  auto backoff = config.initial_backoff;
  std::string last_failure;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    http::Response resp;
    try {
      resp = http::post_json(config.endpoint, "/v1/chat/completions", body, key, config.timeout);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kTransport) throw;
      last_failure = http::redact(e.what(), key);
      continue;
    }
    if (resp.status >= 200 && resp.status < 300) return parse_chat_response(resp.body);
    if (!retryable(resp.status)) throw EndpointError(resp.status, http::excerpt(resp.body, key));
    last_failure = "HTTP " + std::to_string(resp.status);
    if (auto ex = http::excerpt(resp.body, key); !ex.empty()) last_failure += ": " + ex;
  }
  throw Error(ErrorKind::kTransport, "chat completion failed after " +
                                         std::to_string(config.max_retries + 1) +
                                         " attempts; last failure: " + last_failure);
}

MockScript MockScript::from_json(const json& j) {
  if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array())
    throw Error(ErrorKind::kConfig, "mock script needs a \"rules\" array");
  MockScript script;
  if (j.contains("corruption_rate")) {
    if (!j["corruption_rate"].is_number())
      throw Error(ErrorKind::kConfig, "mock corruption_rate must be a number");
    script.corruption_rate = j["corruption_rate"].get<double>();
  }
  if (!(script.corruption_rate >= 0.0 && script.corruption_rate <= 1.0))
    throw Error(ErrorKind::kConfig, "mock corruption_rate must be within [0, 1]");
  if (j.contains("seed")) {
    const auto& seed = j["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
      throw Error(ErrorKind::kConfig, "mock seed must be a non-negative integer");
    script.seed = j["seed"].get<std::uint64_t>();
  }
  std::size_t i = 0;
  for (const auto& r : j["rules"]) {
    auto where = "mock rule " + std::to_string(i++);
    if (!r.is_object() || !r.contains("pattern") || !r["pattern"].is_string() ||
        text::trim(r["pattern"].get<std::string>()).empty())
      throw Error(ErrorKind::kConfig, where + " needs a non-empty \"pattern\"");
    if (!r.contains("event") || !r["event"].is_object())
      throw Error(ErrorKind::kConfig, where + " needs an \"event\" object");
    MockRule rule;
    rule.pattern = r["pattern"].get<std::string>();
    if (r.contains("question") && !r["question"].is_null()) {
      if (!r["question"].is_string()) throw Error(ErrorKind::kConfig, where + ": question must be a string");
      rule.question = r["question"].get<std::string>();
    }
    rule.event = events::from_json(r["event"]);
    rule.event.sources.clear();
    script.rules.push_back(std::move(rule));
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  json j = json::parse(fsutil::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::kConfig, path.string() + " is not valid JSON");
  return from_json(j);
}

json MockScript::to_json() const {
  json arr = json::array();
  for (const auto& r : rules) {
    json jr = {{"pattern", r.pattern}, {"event", events::to_json(r.event)}};
    jr["event"].erase("sources");
    if (r.question) jr["question"] = *r.question;
    arr.push_back(std::move(jr));
  }
  return {{"rules", arr}, {"corruption_rate", corruption_rate}, {"seed", seed}};
}

std::vector<std::pair<std::size_t, events::Property>> corrupted_slots(const MockScript& script) {
  std::vector<std::pair<std::size_t, events::Property>> universe;
  for (std::size_t i = 0; i < script.rules.size(); ++i)
    for (auto p : events::kProperties)
      if (script.rules[i].event.get(p)) universe.emplace_back(i, p);

  auto count = static_cast<std::size_t>(
      std::floor(script.corruption_rate * static_cast<double>(universe.size()) + 1e-9));
  count = std::min(count, universe.size());
  std::mt19937_64 rng(script.seed);
  for (std::size_t i = 0; i < count; ++i) {
    auto j = i + bounded(rng, universe.size() - i);
    std::swap(universe[i], universe[j]);
  }
  universe.resize(count);
  return universe;
}

ChatResponse mock_complete(const prompt::AssembledPrompt& prompt, const MockScript& script) {
  std::set<std::pair<std::size_t, events::Property>> corrupt;
  if (script.corruption_rate > 0.0) {
    auto picked = corrupted_slots(script);
    corrupt.insert(picked.begin(), picked.end());
  }

  json out = json::array();
  for (const auto& passage : prompt.passages) {
    for (std::size_t i = 0; i < script.rules.size(); ++i) {
      const auto& rule = script.rules[i];
      if (!text::icontains(passage.text, rule.pattern)) continue;
      if (rule.question && !text::icontains(prompt.question, *rule.question)) continue;
      auto e = rule.event;
      for (auto p : events::kProperties)
        if (e.get(p) && corrupt.contains({i, p})) e.get(p) = std::string(kCorruptedToken);
      e.sources = {passage.tag};
      out.push_back(events::to_json(e));
      break;
    }
  }
  return {out.dump(), FinishReason::kStop, std::nullopt};
}

namespace {

class RemoteModel final : public ChatModel {
 public:
  explicit RemoteModel(LlmConfig config) : config_(std::move(config)) { config_.validate(); }
  ChatResponse complete(const prompt::AssembledPrompt& p) const override {
    return llm::complete(p, config_);
  }

 private:
  LlmConfig config_;
};

class MockModel final : public ChatModel {
 public:
  explicit MockModel(MockScript script) : script_(std::move(script)) {}
  ChatResponse complete(const prompt::AssembledPrompt& p) const override {
    return mock_complete(p, script_);
  }

 private:
  MockScript script_;
};

}  // namespace

std::unique_ptr<ChatModel> make_remote_model(LlmConfig config) {
  return std::make_unique<RemoteModel>(std::move(config));
}

std::unique_ptr<ChatModel> make_mock_model(MockScript script) {
  return std::make_unique<MockModel>(std::move(script));
}

}  // namespace polevent::llm
