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

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "json.hpp"
#include "polevent/error.hpp"
#include "polevent/llm.hpp"
#include "stub_server.hpp"

using namespace polevent;
using namespace polevent::llm;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kKeyVar = "POLEVENT_TEST_LLM_KEY";

prompt::AssembledPrompt make_prompt(std::vector<std::pair<std::string, std::string>> passages,
                                    std::string question = "What happened?") {
  prompt::AssembledPrompt p;
  p.system = "system text";
  p.question = question;
  p.user = "user text for " + question;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    auto tag = "S" + std::to_string(i + 1);
    p.context_ids.push_back(passages[i].first);
    p.passages.push_back({tag, passages[i].first, passages[i].second});
  }
  return p;
}

LlmConfig stub_config(const std::string& url) {
  LlmConfig c;
  c.endpoint = url;
  c.model = "stub-chat";
  c.max_tokens = 256;
  c.timeout = std::chrono::milliseconds(5000);
  c.api_key_env = kKeyVar;
  c.initial_backoff = std::chrono::milliseconds(20);
  return c;
}

std::string chat_body(const std::string& content) {
  return json{{"choices", json::array({{{"index", 0},
                                        {"message", {{"role", "assistant"}, {"content", content}}},
                                        {"finish_reason", "stop"}}})},
              {"usage", {{"prompt_tokens", 10}, {"completion_tokens", 5}, {"total_tokens", 15}}}}
      .dump();
}

json fda_event() {
  return {{"actor", "FDA"},
          {"action", "approves"},
          {"instrument", "COVID-19 breathalyzer test"},
          {"time", "2022-04-14"},
          {"reporter", "Sarah Ruiz-Grossman"}};
}

}  // namespace

TEST_CASE("complete returns the canned message content and sends the chat wire shape") {
  const std::string canned = R"([{"actor":"Judge","action":"overturns","sources":["S1"]}])";
  json seen;
  std::string auth;
  fixtures::StubServer stub([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      seen = json::parse(req.body);
      auth = req.get_header_value("Authorization");
      res.set_content(chat_body(canned), "application/json");
    });
  });
  setenv(kKeyVar, "sk-chat-1", 1);
  auto r = complete(make_prompt({{"d#0", "text"}}), stub_config(stub.url()));
  unsetenv(kKeyVar);

  CHECK(r.text == canned);
  CHECK(r.finish_reason == FinishReason::kStop);
  REQUIRE(r.usage);
  CHECK(r.usage->total_tokens == 15);
  CHECK(seen["model"] == "stub-chat");
  CHECK(seen["temperature"] == 0.0);
  CHECK(seen["max_tokens"] == 256);
  REQUIRE(seen["messages"].size() == 2);
  CHECK(seen["messages"][0]["role"] == "system");
  CHECK(seen["messages"][0]["content"] == "system text");
  CHECK(seen["messages"][1]["role"] == "user");
  CHECK(seen["messages"][1]["content"] == "user text for What happened?");
  CHECK(auth == "Bearer sk-chat-1");
}

TEST_CASE("no Authorization header without a key") {
  std::string auth = "unset";
  fixtures::StubServer stub([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      auth = req.get_header_value("Authorization");
      res.set_content(chat_body("[]"), "application/json");
    });
  });
  unsetenv(kKeyVar);
  CHECK(complete(make_prompt({}), stub_config(stub.url())).text == "[]");
  CHECK(auth.empty());
}

TEST_CASE("HTTP 401 fails fast with EndpointError and no secret in the message") {
  std::atomic<int> calls{0};
  fixtures::StubServer stub([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      res.status = 401;
      res.set_content("bad token: " + req.get_header_value("Authorization"), "text/plain");
    });
  });
  setenv(kKeyVar, "sk-very-secret", 1);
  try {
    complete(make_prompt({}), stub_config(stub.url()));
    FAIL("expected EndpointError");
  } catch (const EndpointError& e) {
    CHECK(e.status() == 401);
    CHECK(e.kind() == ErrorKind::kEndpoint);
    CHECK(std::string(e.what()).find("sk-very-secret") == std::string::npos);
    CHECK(e.body_excerpt().find("sk-very-secret") == std::string::npos);
    CHECK(e.body_excerpt().find("***") != std::string::npos);
  }
  unsetenv(kKeyVar);
  CHECK(calls == 1);
}

TEST_CASE("other 4xx statuses are not retried, 429 is") {
  std::atomic<int> calls{0};
  std::atomic<int> status{404};
  fixtures::StubServer stub([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = status.load();
      res.set_content("nope", "text/plain");
    });
  });
  CHECK_THROWS_AS(complete(make_prompt({}), stub_config(stub.url())), EndpointError);
  CHECK(calls == 1);

  calls = 0;
  status = 429;
  try {
    complete(make_prompt({}), stub_config(stub.url()));
    FAIL("expected TransportError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kTransport);
  }
  CHECK(calls == 4);
}

TEST_CASE("two 503s then success takes three attempts with doubling backoff") {
  std::atomic<int> calls{0};
  fixtures::StubServer stub([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      if (++calls <= 2) {
        res.status = 503;
        res.set_content("busy", "text/plain");
        return;
      }
      res.set_content(chat_body("[]"), "application/json");
    });
  });
  auto start = Clock::now();
  auto r = complete(make_prompt({}), stub_config(stub.url()));
  auto elapsed = Clock::now() - start;
  CHECK(r.text == "[]");
  CHECK(calls == 3);
  CHECK(elapsed >= std::chrono::milliseconds(20 + 40));
}

TEST_CASE("exhausted retries raise TransportError") {
  std::atomic<int> calls{0};
  fixtures::StubServer stub([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 500;
    });
  });
  auto c = stub_config(stub.url());
  try {
    complete(make_prompt({}), c);
    FAIL("expected TransportError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kTransport);
    CHECK(std::string(e.what()).find("HTTP 500") != std::string::npos);
  }
  CHECK(calls == c.max_retries + 1);
}

TEST_CASE("connection refused is retried then reported as TransportError") {
  auto c = stub_config("http://127.0.0.1:1");
  c.max_retries = 1;
  setenv(kKeyVar, "sk-refused", 1);
  try {
    complete(make_prompt({}), c);
    FAIL("expected TransportError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kTransport);
    CHECK(std::string(e.what()).find("sk-refused") == std::string::npos);
  }
  unsetenv(kKeyVar);
}

TEST_CASE("a slow endpoint raises TimeoutError within the deadline") {
  fixtures::StubServer stub([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content(chat_body("[]"), "application/json");
    });
  });
  auto c = stub_config(stub.url());
  c.timeout = std::chrono::milliseconds(300);
  auto start = Clock::now();
  try {
    complete(make_prompt({}), c);
    FAIL("expected TimeoutError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kTimeout);
  }
  CHECK(Clock::now() - start < std::chrono::milliseconds(1400));
}

TEST_CASE("malformed success bodies raise ProtocolError") {
  std::string body;
  fixtures::StubServer stub([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(body, "application/json");
    });
  });
  for (std::string b : {"not json", "{}", R"({"choices":[]})", R"({"choices":[{"message":{}}]})"}) {
    body = b;
    try {
      complete(make_prompt({}), stub_config(stub.url()));
      FAIL("expected ProtocolError for " << b);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kProtocol);
    }
  }
  body = R"({"choices":[{"message":{"content":"[] partial"},"finish_reason":"length"}]})";
  auto r = complete(make_prompt({}), stub_config(stub.url()));
  CHECK(r.finish_reason == FinishReason::kLength);
  CHECK(r.text == "[] partial");
}

TEST_CASE("config defaults and validation") {
  LlmConfig c;
  CHECK(c.temperature == 0.0);
  CHECK(c.max_retries == 3);
  CHECK(c.initial_backoff == std::chrono::milliseconds(500));
  CHECK(c.api_key_env == "POLEVENT_API_KEY");
  CHECK_THROWS_AS(c.validate(), Error);  // no endpoint
  c.endpoint = "http://x";
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.temperature = -0.1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.timeout = std::chrono::milliseconds(0);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("mock: the FDA passage yields its single canned event") {
  auto script = MockScript::from_json(
      {{"rules", json::array({{{"pattern", "Breathalyzer"}, {"event", fda_event()}}})}});
  auto p = make_prompt({{"d1#0", "Senate Republicans block bill"},
                        {"d2#0", "FDA Greenlights First COVID-19 Breathalyzer Test"}});
  auto r = mock_complete(p, script);
  auto j = json::parse(r.text);
  REQUIRE(j.size() == 1);
  auto expected = fda_event();
  for (auto key : {"recipient", "reason", "location"}) expected[key] = nullptr;
  expected["sources"] = json::array({"S2"});
  CHECK(j[0] == expected);
  auto parsed = events::parse_events(r.text);
  REQUIRE(parsed.events.size() == 1);
  CHECK(parsed.events[0].instrument == "COVID-19 breathalyzer test");
}

TEST_CASE("mock: no matching passage yields an empty array") {
  auto script = MockScript::from_json(
      {{"rules", json::array({{{"pattern", "Breathalyzer"}, {"event", fda_event()}}})}});
  CHECK(mock_complete(make_prompt({{"d#0", "unrelated"}}), script).text == "[]");
  CHECK(mock_complete(make_prompt({}), script).text == "[]");
}

TEST_CASE("mock: question filters and case-insensitive patterns") {
  auto script = MockScript::from_json(
      {{"rules", json::array({{{"pattern", "breathalyzer"}, {"question", "fda"}, {"event", fda_event()}}})}});
  auto passages = std::vector<std::pair<std::string, std::string>>{{"d#0", "FDA Breathalyzer"}};
  CHECK(json::parse(mock_complete(make_prompt(passages, "What did the FDA approve?"), script).text).size() == 1);
  CHECK(mock_complete(make_prompt(passages, "Who resigned?"), script).text == "[]");
}

TEST_CASE("mock: rate zero equals a script without corruption and outputs are pure") {
  auto sample = MockScript::load(fixtures::sample_mock());
  auto with_rate = sample;
  with_rate.corruption_rate = 0.0;
  with_rate.seed = 999;
  auto p = make_prompt({{"a#0", "FDA Greenlights First COVID-19 Breathalyzer Test"}},
                       "What did the FDA approve in April 2022?");
  CHECK(mock_complete(p, with_rate).text == mock_complete(p, sample).text);
  CHECK(mock_complete(p, sample).text != "[]");

  auto corrupted = sample;
  corrupted.corruption_rate = 0.5;
  CHECK(mock_complete(p, corrupted).text == mock_complete(p, corrupted).text);
}

TEST_CASE("mock: corruption picks exactly floor(rate * slots) distinct slots") {
  auto sample = MockScript::load(fixtures::sample_mock());
  std::size_t total = 0;
  for (const auto& r : sample.rules) total += r.event.filled_slots();
  REQUIRE(total == 78);
  for (double rate : {0.0, 0.13, 0.5, 1.0}) {
    auto s = sample;
    s.corruption_rate = rate;
    auto picked = corrupted_slots(s);
    CHECK(picked.size() == static_cast<std::size_t>(std::floor(rate * total + 1e-9)));
    std::set<std::pair<std::size_t, events::Property>> unique(picked.begin(), picked.end());
    CHECK(unique.size() == picked.size());
    for (auto [i, p] : picked) CHECK(s.rules[i].event.get(p).has_value());
  }
  auto a = sample, b = sample;
  a.corruption_rate = b.corruption_rate = 0.3;
  b.seed = a.seed + 1;
  CHECK(corrupted_slots(a) == corrupted_slots(a));
  CHECK(corrupted_slots(a) != corrupted_slots(b));
}

TEST_CASE("mock: corrupted values reach the output") {
  auto s = MockScript::from_json({{"rules", json::array({{{"pattern", "x"}, {"event", fda_event()}}})},
                                  {"corruption_rate", 1.0},
                                  {"seed", 1}});
  auto j = json::parse(mock_complete(make_prompt({{"d#0", "x"}}), s).text);
  REQUIRE(j.size() == 1);
  for (auto key : {"actor", "action", "instrument", "time", "reporter"}) CHECK(j[0][key] == "CORRUPTED");
  CHECK(j[0]["recipient"].is_null());
}

TEST_CASE("mock script schema errors") {
  auto kind = [](const json& j) {
    try {
      MockScript::from_json(j);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  CHECK(kind(json::object()) == ErrorKind::kConfig);
  CHECK(kind({{"rules", json::array({{{"pattern", ""}, {"event", json::object()}}})}}) == ErrorKind::kConfig);
  CHECK(kind({{"rules", json::array({{{"pattern", "x"}}})}}) == ErrorKind::kConfig);
  CHECK(kind({{"rules", json::array()}, {"corruption_rate", 1.5}}) == ErrorKind::kConfig);
  CHECK(kind({{"rules", json::array()}, {"seed", -1}}) == ErrorKind::kConfig);

  auto s = MockScript::load(fixtures::sample_mock());
  CHECK(MockScript::from_json(s.to_json()).to_json() == s.to_json());
}
