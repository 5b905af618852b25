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

// Task environments: one immutable instance, its agents, a termination and
// reward rule, and deterministic scripted agents.

#ifndef INTERCOMM_ENVIRONMENT_H_
#define INTERCOMM_ENVIRONMENT_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "intercomm/backend.h"
#include "intercomm/pattern.h"
#include "intercomm/policy.h"
#include "intercomm/transcript.h"

namespace intercomm {

struct StepResult {
  bool terminal = false;
  std::optional<Reward> reward;

  static StepResult Continue() { return {}; }
  static StepResult Terminal(double value) { return {true, Reward(value)}; }
  friend bool operator==(const StepResult&, const StepResult&) = default;
};

/// Who speaks after an interrupted turn.
enum class Routing {
  kInterruptorSpeaksNext,  // the interruptor replies before anyone else
  kContinueOrder,          // the round carries on in pattern order
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string task_name() const = 0;
  virtual std::vector<AgentId> agents() const = 0;
  virtual PatternSpec default_pattern() const = 0;
  virtual Routing routing() const { return Routing::kInterruptorSpeaksNext; }

  /// The listener whose interruption points are labeled in tree sampling.
  virtual std::string interruptor() const = 0;

  /// Called after every committed turn. Must be a pure function of the
  /// transcript.
  virtual StepResult step(const Transcript& transcript) const = 0;

  /// Reward when max_rounds runs out without a terminal step.
  virtual double timeout_reward(const Transcript&) const { return 0.0; }

  /// Prompted exchange for an LLM playing `agent`.
  virtual ChatExchange build_exchange(const std::string& agent,
                                      const Transcript& history,
                                      bool concise) const = 0;

  /// Deterministic stand-in for `agent`'s next message.
  virtual std::string scripted_message(const std::string& agent,
                                       const Transcript& history) const = 0;

  /// True once the received prefix carries everything the listener needs;
  /// drives the oracle policy.
  virtual bool key_delivered(const PolicyContext& context) const = 0;

  /// Synthetic p(Yes) trace for threshold experiments with scripted agents.
  /// Below 0.4 before the key is delivered, in [0.6, 0.8) after.
  virtual double scripted_score(const PolicyContext& context) const;
};

/// Scripted backend whose script is env.scripted_message(agent, history).
std::unique_ptr<AgentBackend> make_scripted_backend(const Environment& env,
                                                    const std::string& agent);

/// Concise system prompt prefix shared by every environment.
std::string concise_instruction();

/// Renders the history as alternating user/assistant messages from
/// `agent`'s point of view.
ChatExchange history_exchange(const std::string& agent,
                              const std::string& system_prompt,
                              const Transcript& history);

}  // namespace intercomm

#endif  // INTERCOMM_ENVIRONMENT_H_
