// Copyright 2026 The Intercomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Prompt text assets and slot filling.
//
// Assets under assets/prompts/ are compiled into the library. A slot is a
// brace-delimited name such as {Chat History}.

#ifndef INTERCOMM_PROMPTS_H_
#define INTERCOMM_PROMPTS_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace intercomm {

/// Embedded asset text by file stem ("interruption", "concise", ...).
/// Throws ConfigError for an unknown name.
std::string_view prompt_asset(std::string_view name);

std::vector<std::string> prompt_asset_names();

class PromptTemplate {
 public:
  explicit PromptTemplate(std::string text);

  static PromptTemplate from_asset(std::string_view name);
  static PromptTemplate from_file(const std::filesystem::path& path);

  /// Slot names in order of first appearance.
  std::vector<std::string> slots() const;

  /// Replaces every slot. Throws ConfigError when a slot has no value.
  std::string render(const std::map<std::string, std::string>& values) const;

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

inline constexpr std::string_view kHistorySlot = "Chat History";
inline constexpr std::string_view kChunksSlot = "Current Message Chunks";

}  // namespace intercomm

#endif  // INTERCOMM_PROMPTS_H_
