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

// The `polevent` command line: build, query, repl, eval and config.
//
// Exit codes: 0 ok, 1 general failure, 2 bad data or configuration,
// 3 transport/endpoint failure, 64 usage error.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "polevent/embed.hpp"
#include "polevent/engine.hpp"
#include "polevent/llm.hpp"

namespace polevent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitTransport = 3;
inline constexpr int kExitUsage = 64;

struct AppConfig {
  engine::EngineConfig engine;
  embed::EmbedderConfig embedder;
  llm::LlmConfig llm;
  double tau = 0.8;
  std::optional<std::filesystem::path> system_prompt_file;
  std::optional<std::filesystem::path> wrapper_prompt_file;
  std::optional<std::filesystem::path> corpus_path;
  std::optional<std::filesystem::path> index_dir;
  std::optional<std::filesystem::path> gold_path;
  std::optional<std::filesystem::path> mock_script;

  // Sections: corpus, embedder, llm, engine, eval, prompt, paths. Unknown
  // keys and anything that looks like a credential are rejected with
  // Error(kConfig); the bearer token only ever comes from the environment.
  static AppConfig from_json(const nlohmann::json& j);
  static AppConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// Maps an exception from the library to an exit code.
int exit_code_for(const std::exception& e);

// Runs one invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace polevent::cli
