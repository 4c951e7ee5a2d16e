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

#include "polevent/prompt.hpp"

#include <algorithm>

#include "polevent/error.hpp"
#include "polevent/events.hpp"
#include "polevent/fsutil.hpp"
#include "polevent/text.hpp"

namespace polevent::prompt {

namespace {

constexpr std::string_view kDefaultSystem =
    "You extract political events from news passages.\n"
    "Work only from the context passages in the user message. Do not add facts from "
    "outside them.\n"
    "\n"
    "{schema}\n"
    "Use null for any property the passages do not state. Write one object per action. "
    "Output only the JSON array, with no prose before or after it. If the passages "
    "describe no political event relevant to the question, output [].";

constexpr std::string_view kDefaultWrapper =
    "Context passages:\n"
    "{context}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Answer with the JSON array only.";

std::size_t count_of(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

constexpr std::string_view kPropertyHints[] = {
    "who performs the action",
    "what was done; never null",
    "who or what the action is directed at",
    "object or means used to carry out the action",
    "why it happened",
    "when it happened, as YYYY-MM-DD when a date is known",
    "where it happened",
    "who reported it",
};

}  // namespace

PromptTemplate PromptTemplate::make(std::string system_text, std::string wrapper_text) {
  if (count_of(system_text, kSchemaPlaceholder) != 1)
    throw Error(ErrorKind::kTemplate, "system prompt must contain {schema} exactly once");
  if (count_of(wrapper_text, kContextPlaceholder) != 1)
    throw Error(ErrorKind::kTemplate, "wrapper prompt must contain {context} exactly once");
  if (count_of(wrapper_text, kQuestionPlaceholder) != 1)
    throw Error(ErrorKind::kTemplate, "wrapper prompt must contain {question} exactly once");
  return PromptTemplate(std::move(system_text), std::move(wrapper_text));
}

PromptTemplate PromptTemplate::defaults() {
  return make(std::string(kDefaultSystem), std::string(kDefaultWrapper));
}

PromptTemplate PromptTemplate::from_files(const std::filesystem::path& system_file,
                                          const std::filesystem::path& wrapper_file) {
  return make(fsutil::read_file(system_file), fsutil::read_file(wrapper_file));
}

std::string schema_block() {
  std::string out =
      "Return a JSON array. Each element is one event object with exactly these keys:\n";
  for (std::size_t i = 0; i < events::kProperties.size(); ++i) {
    out += "  \"";
    out += events::property_name(events::kProperties[i]);
    out += "\": ";
    out += kPropertyHints[i];
    out += events::kProperties[i] == events::Property::kAction ? "\n" : ", or null\n";
  }
  out +=
      "  \"sources\": list of the S-tags (for example [\"S1\"]) of the passages that "
      "support the event\n"
      "Every event needs an action and at least one of actor or recipient.\n";
  return out;
}

AssembledPrompt render(const PromptTemplate& tmpl, std::string_view question,
                       std::span<const index::RetrievalHit> hits, std::size_t budget_chars) {
  auto q = text::trim(question);
  if (q.empty()) throw Error(ErrorKind::kInvalidArgument, "question must not be empty");
  if (budget_chars < kMinBudgetChars) {
    throw Error(ErrorKind::kInvalidArgument,
                "budget_chars must be at least " + std::to_string(kMinBudgetChars));
  }

  std::vector<index::RetrievalHit> sorted(hits.begin(), hits.end());
  std::stable_sort(sorted.begin(), sorted.end(), index::hit_before);

  const auto& wrapper = tmpl.wrapper_text();
  const std::size_t base = wrapper.size() - kContextPlaceholder.size() -
                           kQuestionPlaceholder.size() + q.size();

  AssembledPrompt out;
  out.question = std::string(q);
  std::string block;
  for (const auto& h : sorted) {
    std::string tag = "S" + std::to_string(out.context_ids.size() + 1);
    std::string entry = "[" + tag + ": " + h.chunk_id + "] " + h.text;
    std::size_t grown = block.size() + (block.empty() ? 0 : 1) + entry.size();
    if (base + grown > budget_chars) break;
    if (!block.empty()) block += '\n';
    block += entry;
    out.context_ids.push_back(h.chunk_id);
    out.passages.push_back({std::move(tag), h.chunk_id, h.text});
  }
  if (out.context_ids.empty()) {
    throw Error(ErrorKind::kBudget, "no retrieved passage fits in " +
                                        std::to_string(budget_chars) + " characters");
  }

  // Placeholders are expanded in one left-to-right pass over the template so
  // braces inside the question or passages are never re-expanded.
  auto ctx_pos = wrapper.find(kContextPlaceholder);
  auto q_pos = wrapper.find(kQuestionPlaceholder);
  std::string_view w(wrapper);
  if (ctx_pos < q_pos) {
    out.user = std::string(w.substr(0, ctx_pos)) + block +
               std::string(w.substr(ctx_pos + kContextPlaceholder.size(),
                                    q_pos - ctx_pos - kContextPlaceholder.size())) +
               std::string(q) + std::string(w.substr(q_pos + kQuestionPlaceholder.size()));
  } else {
    out.user = std::string(w.substr(0, q_pos)) + std::string(q) +
               std::string(w.substr(q_pos + kQuestionPlaceholder.size(),
                                    ctx_pos - q_pos - kQuestionPlaceholder.size())) +
               block + std::string(w.substr(ctx_pos + kContextPlaceholder.size()));
  }

  const auto& sys = tmpl.system_text();
  auto s_pos = sys.find(kSchemaPlaceholder);
  out.system = sys.substr(0, s_pos) + schema_block() + sys.substr(s_pos + kSchemaPlaceholder.size());
  return out;
}

}  // namespace polevent::prompt
