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

// Internal: the only translation unit that touches cpp-httplib.

#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace polevent::http {

struct Response {
  int status = 0;
  std::string body;
};

// POSTs a JSON body to <endpoint><path>. Returns any HTTP response,
// successful or not. Throws Error(kTransport) when no response arrives and
// Error(kTimeout) when the failure happened at or past the deadline.
Response post_json(const std::string& endpoint, const std::string& path,
                   const std::string& body, const std::optional<std::string>& bearer,
                   std::chrono::milliseconds timeout);

std::optional<std::string> api_key_from_env(const std::string& var);

// Replaces every occurrence of the secret with "***".
std::string redact(std::string text, const std::optional<std::string>& secret);

// First 200 bytes of a body, redacted.
std::string excerpt(const std::string& body, const std::optional<std::string>& secret);

}  // namespace polevent::http
