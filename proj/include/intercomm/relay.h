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

// Fact relay: a small synthetic task with an explicit price for
// interrupting too early.
//
// The sender relays facts one per turn. Each fact message hides one key
// token somewhere in it. The receiver acknowledges a fact whose key it
// received; if the key was cut off it asks for a repeat, and the sender
// resends the fact with the key first. In kFail mode a missed key ends the
// game with reward 0 instead.

#ifndef INTERCOMM_RELAY_H_
#define INTERCOMM_RELAY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "intercomm/environment.h"

namespace intercomm {

struct RelayFact {
  TokenList tokens;
  int key_position = 0;  // index of the key token in `tokens`
  friend bool operator==(const RelayFact&, const RelayFact&) = default;
};

enum class MissMode { kExtraRound, kFail };

struct RelayInstance {
  std::string id;
  std::vector<RelayFact> facts;
  int clarification_length = 8;
  MissMode miss_mode = MissMode::kExtraRound;
  friend bool operator==(const RelayInstance&, const RelayInstance&) = default;
};

void validate(const RelayInstance& instance);

enum class KeyPlacement { kEnd, kMiddle, kRandom };

struct RelayGenOptions {
  int facts = 2;
  int min_tokens = 8;
  int max_tokens = 16;
  KeyPlacement placement = KeyPlacement::kRandom;
  int clarification_length = 8;
  MissMode miss_mode = MissMode::kExtraRound;
  bool random_miss_mode = false;
};

RelayInstance gen_relay_instance(std::uint64_t seed,
                                 const RelayGenOptions& options = {});

class RelayEnv final : public Environment {
 public:
  static constexpr const char* kSender = "sender";
  static constexpr const char* kReceiver = "receiver";

  explicit RelayEnv(RelayInstance instance);

  std::string task_name() const override { return "relay"; }
  std::vector<AgentId> agents() const override;
  PatternSpec default_pattern() const override;
  std::string interruptor() const override { return kReceiver; }
  StepResult step(const Transcript& transcript) const override;
  ChatExchange build_exchange(const std::string& agent,
                              const Transcript& history,
                              bool concise) const override;
  std::string scripted_message(const std::string& agent,
                               const Transcript& history) const override;
  bool key_delivered(const PolicyContext& context) const override;

  const RelayInstance& instance() const { return instance_; }

  struct Progress {
    int acked = 0;         // facts confirmed so far
    bool repeat = false;   // next sender turn is a resend
    bool failed = false;   // a key was missed in kFail mode
  };
  Progress progress(const Transcript& history) const;

  /// The sender's message for fact `index`; a resend puts the key first.
  TokenList fact_message(int index, bool repeat) const;

  std::string key_token(int index) const;

 private:
  RelayInstance instance_;
};

}  // namespace intercomm

#endif  // INTERCOMM_RELAY_H_
