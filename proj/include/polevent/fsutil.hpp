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

#include <filesystem>
#include <string>
#include <string_view>

namespace polevent::fsutil {

// Writes to a sibling temp file, flushes, then renames over the target so
// readers see either the old or the new content. Throws Error(kIo).
void write_atomic(const std::filesystem::path& path, std::string_view content);

// Throws Error(kIo) when the file cannot be opened or read.
std::string read_file(const std::filesystem::path& path);

}  // namespace polevent::fsutil
