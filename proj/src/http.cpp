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

#include "http.hpp"

#include <cstdlib>

#include "httplib.h"

#include "polevent/error.hpp"

namespace polevent::http {

namespace {

struct Target {
  std::string scheme_host_port;
  std::string base_path;
};

Target split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorKind::kConfig, "endpoint must start with http:// or https://");
  auto scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw Error(ErrorKind::kConfig, "unsupported endpoint scheme '" + scheme + "'");
  auto path_start = endpoint.find('/', scheme_end + 3);
  Target t;
  t.scheme_host_port = endpoint.substr(0, path_start);
  if (path_start != std::string::npos) t.base_path = endpoint.substr(path_start);
  while (!t.base_path.empty() && t.base_path.back() == '/') t.base_path.pop_back();
  return t;
}

}  // namespace

Response post_json(const std::string& endpoint, const std::string& path,
                   const std::string& body, const std::optional<std::string>& bearer,
                   std::chrono::milliseconds timeout) {
  auto target = split_endpoint(endpoint);
  httplib::Client client(target.scheme_host_port);
  if (!client.is_valid())
    throw Error(ErrorKind::kTransport, "cannot create HTTP client for " + target.scheme_host_port);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (bearer) headers.emplace("Authorization", "Bearer " + *bearer);

  auto started = std::chrono::steady_clock::now();
  auto result = client.Post(target.base_path + path, headers, body, "application/json");
  if (!result) {
    auto err = result.error();
    auto elapsed = std::chrono::steady_clock::now() - started;
    std::string what = httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout)) {
      throw Error(ErrorKind::kTimeout, "request to " + target.scheme_host_port +
                                           " timed out after " +
                                           std::to_string(timeout.count()) + " ms");
    }
    throw Error(ErrorKind::kTransport,
                "request to " + target.scheme_host_port + " failed: " + what);
  }
  return {result->status, result->body};
}

std::optional<std::string> api_key_from_env(const std::string& var) {
  const char* v = std::getenv(var.c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

std::string redact(std::string text, const std::optional<std::string>& secret) {
  if (!secret || secret->empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(*secret, pos)) != std::string::npos) {
    text.replace(pos, secret->size(), "***");
    pos += 3;
  }
  return text;
}

std::string excerpt(const std::string& body, const std::optional<std::string>& secret) {
  auto clean = redact(body, secret);
  if (clean.size() > 200) {
    clean.resize(200);
    clean += "...";
  }
  return clean;
}

}  // namespace polevent::http
