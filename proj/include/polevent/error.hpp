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

#include <stdexcept>
#include <string>
#include <string_view>

namespace polevent {

// Every failure raised by the library carries one of these kinds. The CLI
// maps kinds onto its exit codes, so adding a kind means touching cli.cpp.
enum class ErrorKind {
  kIo,
  kEmptyCorpus,
  kEmptyText,
  kInvalidVector,
  kDim,
  kFormat,
  kTemplate,
  kBudget,
  kTransport,
  kEndpoint,
  kProtocol,
  kTimeout,
  kParse,
  kAlignment,
  kGoldFormat,
  kQueryOnEmptyIndex,
  kEmbedderMismatch,
  kConfig,
  kInvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Non-success HTTP status from a remote endpoint. The body excerpt is
// truncated and scrubbed of the bearer token before it gets here.
class EndpointError : public Error {
 public:
  EndpointError(int status, std::string body_excerpt);

  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

// No JSON could be located in model output. The raw text is kept for audit.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string raw_text)
      : Error(ErrorKind::kParse, message), raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

}  // namespace polevent
