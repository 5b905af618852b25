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

// Moderated debate: Pro and Con defend opposite answers to a multiple
// choice question, a moderator listens to both and votes. Voting for the
// side that holds the correct answer scores 1.
//
// The scripted moderator waits until the correct side's decisive statement
// has reached it, then votes for that side.

#ifndef INTERCOMM_DEBATE_H_
#define INTERCOMM_DEBATE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intercomm/environment.h"

namespace intercomm {

struct DebateInstance {
  std::string id;
  std::string question;
  char correct_answer = 'A';
  char incorrect_answer = 'B';
  bool pro_holds_correct = true;
  std::vector<std::string> evidence_pro;
  std::vector<std::string> evidence_con;
  int decisive_statement = 0;  // index into the correct side's evidence

  char pro_answer() const {
    return pro_holds_correct ? correct_answer : incorrect_answer;
  }
  char con_answer() const {
    return pro_holds_correct ? incorrect_answer : correct_answer;
  }
  friend bool operator==(const DebateInstance&, const DebateInstance&) = default;
};

void validate(const DebateInstance& instance);

DebateInstance gen_debate_instance(std::uint64_t seed);

enum class Side { kPro, kCon };

struct Verdict {
  bool preference = false;
  std::optional<Side> side;
};

/// Lenient reading of the moderator's JSON-like block: finds
/// "Supported Side" followed by pro or con, and the preference flag when
/// present. nullopt when no side can be found.
std::optional<Verdict> parse_verdict_block(std::string_view text);

std::string format_verdict(std::optional<Side> side, const std::string& answer);

class DebateEnv final : public Environment {
 public:
  static constexpr const char* kPro = "pro";
  static constexpr const char* kCon = "con";
  static constexpr const char* kModerator = "moderator";

  /// always_wait: the scripted moderator never votes.
  explicit DebateEnv(DebateInstance instance, bool always_wait = false);

  std::string task_name() const override { return "debate"; }
  std::vector<AgentId> agents() const override;
  PatternSpec default_pattern() const override;
  Routing routing() const override { return Routing::kContinueOrder; }
  std::string interruptor() const override { return kModerator; }
  StepResult step(const Transcript& transcript) const override;
  ChatExchange build_exchange(const std::string& agent,
                              const Transcript& history,
                              bool concise) const override;
  std::string scripted_message(const std::string& agent,
                               const Transcript& history) const override;
  bool key_delivered(const PolicyContext& context) const override;

  const DebateInstance& instance() const { return instance_; }

  /// Statement sentences of `side`, tokenized.
  std::vector<TokenList> statements(const std::string& side) const;
  int statements_delivered(const std::string& side,
                           const Transcript& history) const;
  bool decisive_heard(const Transcript& history) const;

 private:
  TokenList stance(const std::string& side) const;
  const std::string& correct_side() const;

  DebateInstance instance_;
  bool always_wait_;
};

}  // namespace intercomm

#endif  // INTERCOMM_DEBATE_H_
