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

// Political event records: eight optional properties plus the chunk ids
// that support them.
//
// An event is valid when it has an action and at least one participant
// (actor or recipient). Everything else is optional.

#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "polevent/corpus.hpp"
#include "polevent/index.hpp"

namespace polevent::events {

enum class Property {
  kActor,
  kAction,
  kRecipient,
  kInstrument,
  kReason,
  kTime,
  kLocation,
  kReporter,
};

inline constexpr std::array<Property, 8> kProperties = {
    Property::kActor,  Property::kAction, Property::kRecipient, Property::kInstrument,
    Property::kReason, Property::kTime,   Property::kLocation,  Property::kReporter,
};

std::string_view property_name(Property p);

struct PoliticalEvent {
  std::optional<std::string> actor;
  std::optional<std::string> action;
  std::optional<std::string> recipient;
  std::optional<std::string> instrument;
  std::optional<std::string> reason;
  std::optional<std::string> time;
  std::optional<std::string> location;
  std::optional<std::string> reporter;
  // S-tags ("S3") straight out of the model; chunk ids after attach_sources.
  std::vector<std::string> sources;

  const std::optional<std::string>& get(Property p) const;
  std::optional<std::string>& get(Property p);

  // Count of properties carrying a value.
  std::size_t filled_slots() const;

  bool operator==(const PoliticalEvent&) const = default;
};

enum class Violation {
  kMissingAction,
  kMissingParticipant,
  kUnknownSource,
  kMissingSource,
  kNotAnObject,
};

std::string_view to_string(Violation v);

// Empty when valid.
std::vector<Violation> validate(const PoliticalEvent& e);

// Canonical form: exactly the eight property keys plus "sources", null for
// absent properties.
nlohmann::json to_json(const PoliticalEvent& e);

// Lenient reader used for model output and gold files: property keys match
// case-insensitively, unknown keys are ignored, empty strings count as
// absent, and time values get best-effort ISO-8601 canonicalization.
PoliticalEvent from_json(const nlohmann::json& obj);

// "2022-04-14", "2022/04/14", "April 14, 2022", "14 April 2022" -> ISO date.
// Anything else comes back trimmed but otherwise verbatim.
std::string canonical_time(std::string_view s);

// Normalizes "S3", "[S3]", "[S3: d1#0]" to "S3"; other strings are trimmed.
std::string normalize_source_tag(std::string_view s);

struct InvalidObject {
  nlohmann::json raw;
  std::vector<Violation> violations;
};

struct SourceRef {
  std::string chunk_id;
  std::string doc_id;
  std::string headline;
  std::optional<std::string> link;
};

struct ExtractionResult {
  std::vector<PoliticalEvent> events;
  std::vector<InvalidObject> invalid;
  std::string raw_text;
  // Every chunk cited by a valid event, after attach_sources.
  std::map<std::string, SourceRef> sources;
};

// Finds the first top-level JSON array (or a lone object) in free text,
// skipping prose and code fences, and splits its elements into valid events
// and invalid objects. Throws ParseError when no JSON value can be found.
ExtractionResult parse_events(std::string_view llm_text);

using DocumentLookup = std::function<const corpus::Document*(const std::string& doc_id)>;

// Binds S-tags to the context passages the prompt actually carried
// (context[n-1] is S<n>). Events citing anything else, or nothing, move to
// invalid. The lookup, when given, supplies headline and link per document.
ExtractionResult attach_sources(ExtractionResult result,
                                std::span<const index::RetrievalHit> context,
                                const DocumentLookup& lookup = {});

}  // namespace polevent::events
