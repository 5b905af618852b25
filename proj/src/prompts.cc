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

#include "intercomm/prompts.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "intercomm/error.h"

namespace intercomm {
namespace detail {

struct PromptAssetEntry {
  std::string_view name;
  std::string_view text;
};

extern const PromptAssetEntry kPromptAssets[];
extern const std::size_t kPromptAssetCount;

}  // namespace detail

std::string_view prompt_asset(std::string_view name) {
  for (std::size_t i = 0; i < detail::kPromptAssetCount; ++i) {
    if (detail::kPromptAssets[i].name == name) {
      return detail::kPromptAssets[i].text;
    }
  }
  throw ConfigError("unknown prompt asset: " + std::string(name));
}

std::vector<std::string> prompt_asset_names() {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < detail::kPromptAssetCount; ++i) {
    out.emplace_back(detail::kPromptAssets[i].name);
  }
  return out;
}

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {}

PromptTemplate PromptTemplate::from_asset(std::string_view name) {
  return PromptTemplate(std::string(prompt_asset(name)));
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read prompt template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return PromptTemplate(ss.str());
}

namespace {

// Calls fn(begin, end, name) for every {name} in text; names may contain
// spaces but no braces or newlines.
template <typename Fn>
void scan_slots(const std::string& text, Fn&& fn) {
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string::npos) {
    const auto close = text.find_first_of("{}\n", pos + 1);
    if (close == std::string::npos) break;
    if (text[close] != '}' || close == pos + 1) {
      pos = close;
      continue;
    }
    fn(pos, close + 1, text.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
}

}  // namespace

std::vector<std::string> PromptTemplate::slots() const {
  std::vector<std::string> out;
  scan_slots(text_, [&](std::size_t, std::size_t, std::string name) {
    if (std::find(out.begin(), out.end(), name) == out.end()) {
      out.push_back(std::move(name));
    }
  });
  return out;
}

std::string PromptTemplate::render(
    const std::map<std::string, std::string>& values) const {
  std::string out;
  std::size_t last = 0;
  scan_slots(text_, [&](std::size_t begin, std::size_t end,
                        const std::string& name) {
    const auto it = values.find(name);
    if (it == values.end()) {
      throw ConfigError("prompt slot {" + name + "} has no value");
    }
    out.append(text_, last, begin - last);
    out += it->second;
    last = end;
  });
  out.append(text_, last, std::string::npos);
  return out;
}

}  // namespace intercomm
