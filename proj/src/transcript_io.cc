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

#include "intercomm/transcript_io.h"

#include <istream>
#include <ostream>
#include <sstream>

#include "intercomm/error.h"

namespace intercomm {

ordered_json message_to_json(const Message& m) {
  ordered_json j;
  j["round"] = m.round;
  j["author"] = m.author;
  j["tokens"] = m.all_tokens();
  j["chunk_size"] = m.chunk_size;
  j["truncated_at"] =
      m.truncated_at ? ordered_json(*m.truncated_at) : ordered_json(nullptr);
  auto decisions = ordered_json::array();
  for (const auto& d : m.decisions) {
    ordered_json dj;
    dj["agent"] = d.agent;
    dj["chunk"] = d.chunk;
    dj["text"] = d.token().text;
    decisions.push_back(std::move(dj));
  }
  j["decision_tokens"] = std::move(decisions);
  return j;
}

Message message_from_json(const ordered_json& j) {
  try {
    std::optional<int> truncated;
    if (!j.at("truncated_at").is_null()) {
      truncated = j.at("truncated_at").get<int>();
    }
    std::vector<DecisionToken> decisions;
    for (const auto& dj : j.at("decision_tokens")) {
      const auto text = dj.at("text").get<std::string>();
      if (text != "Yes" && text != "No") {
        throw StructuralError("decision token text must be Yes or No");
      }
      decisions.push_back(DecisionToken{dj.at("agent").get<std::string>(),
                                        dj.at("chunk").get<int>(),
                                        text == "Yes"});
    }
    return make_message(j.at("author").get<std::string>(),
                        j.at("round").get<int>(),
                        j.at("tokens").get<TokenList>(),
                        j.at("chunk_size").get<int>(), truncated,
                        std::move(decisions));
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("malformed turn record: ") + e.what());
  }
}

namespace {

ordered_json footer_to_json(const Transcript& t) {
  ordered_json j;
  j["terminal_round"] = t.terminal_round;
  j["reward"] = t.reward ? ordered_json(t.reward->value) : ordered_json(nullptr);
  return j;
}

bool is_footer(const ordered_json& j) {
  return j.is_object() && j.contains("terminal_round") && !j.contains("round");
}

}  // namespace

void write_jsonl(std::ostream& out, const Transcript& t) {
  for (const auto& m : t.turns) out << message_to_json(m).dump() << '\n';
  out << footer_to_json(t).dump() << '\n';
}

std::string to_jsonl(const Transcript& t) {
  std::ostringstream os;
  write_jsonl(os, t);
  return os.str();
}

std::vector<Transcript> read_transcripts(std::istream& in) {
  std::vector<Transcript> out;
  Transcript current;
  bool open = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw StructuralError("line " + std::to_string(line_no) +
                            ": invalid JSON: " + e.what());
    }
    if (is_footer(j)) {
      current.terminal_round = j.at("terminal_round").get<int>();
      if (!j.at("reward").is_null()) {
        current.reward = Reward(j.at("reward").get<double>());
      }
      validate(current);
      out.push_back(std::move(current));
      current = Transcript{};
      open = false;
    } else {
      current.turns.push_back(message_from_json(j));
      open = true;
    }
  }
  if (open) throw StructuralError("transcript stream ends without a footer");
  return out;
}

Transcript transcript_from_jsonl(const std::string& text) {
  std::istringstream is(text);
  auto all = read_transcripts(is);
  if (all.size() != 1) {
    throw StructuralError("expected exactly one transcript, found " +
                          std::to_string(all.size()));
  }
  return std::move(all.front());
}

std::string render_history(const Transcript& t) {
  std::string out;
  for (const auto& m : t.turns) {
    const auto delivered = m.delivered_tokens();
    out += m.author;
    out += ": ";
    out += join_tokens(delivered);
    out.push_back('\n');
  }
  return out;
}

}  // namespace intercomm
