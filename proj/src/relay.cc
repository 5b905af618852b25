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

#include "intercomm/relay.h"

#include <algorithm>

#include "intercomm/error.h"
#include "intercomm/rng.h"
#include "wordlists.h"

namespace intercomm {

namespace {

constexpr std::string_view kAck = "got it";
constexpr std::string_view kClarify[] = {
    "please", "repeat", "that", "fact", "because", "I",  "missed",
    "the",    "key",    "part", "of",   "it",      "so", "send"};

TokenList clarification(int length) {
  TokenList out;
  for (int i = 0; i < length; ++i) {
    out.emplace_back(kClarify[i % std::size(kClarify)]);
  }
  return out;
}

bool is_ack(const TokenList& t) {
  return join_tokens(t) == kAck;
}

}  // namespace

void validate(const RelayInstance& inst) {
  if (inst.facts.empty()) throw StructuralError("relay without facts");
  if (inst.clarification_length < 1) {
    throw StructuralError("clarification length must be >= 1");
  }
  for (const auto& f : inst.facts) {
    if (f.key_position < 0 ||
        f.key_position >= static_cast<int>(f.tokens.size())) {
      throw StructuralError("relay key position out of range");
    }
    const auto& key = f.tokens[f.key_position];
    if (std::count(f.tokens.begin(), f.tokens.end(), key) != 1) {
      throw StructuralError("relay key token must be unique in its fact");
    }
  }
}

RelayInstance gen_relay_instance(std::uint64_t seed,
                                 const RelayGenOptions& opt) {
  if (opt.facts < 1 || opt.min_tokens < 1 || opt.max_tokens < opt.min_tokens ||
      opt.clarification_length < 1) {
    throw ConfigError("invalid relay generator options");
  }
  Rng rng(derive_seed(seed, "relay"));
  RelayInstance inst;
  inst.id = "relay-" + std::to_string(seed);
  inst.clarification_length = opt.clarification_length;
  inst.miss_mode = opt.random_miss_mode
                       ? (uniform_int(rng, 0, 1) ? MissMode::kFail
                                                 : MissMode::kExtraRound)
                       : opt.miss_mode;
  const auto& pool = words::kClueWords;
  for (int i = 0; i < opt.facts; ++i) {
    RelayFact f;
    const int len = uniform_int(rng, opt.min_tokens, opt.max_tokens);
    for (int k = 0; k < len; ++k) {
      f.tokens.emplace_back(pool[uniform_int(rng, 0, pool.size() - 1)]);
    }
    switch (opt.placement) {
      case KeyPlacement::kEnd: f.key_position = len - 1; break;
      case KeyPlacement::kMiddle: f.key_position = len / 2; break;
      case KeyPlacement::kRandom:
        f.key_position = uniform_int(rng, 0, len - 1);
        break;
    }
    f.tokens[f.key_position] =
        "#" + std::string(words::kEntities[uniform_int(
                  rng, 0, words::kEntities.size() - 1)]) +
        std::to_string(i + 1);
    inst.facts.push_back(std::move(f));
  }
  validate(inst);
  return inst;
}

RelayEnv::RelayEnv(RelayInstance instance) : instance_(std::move(instance)) {
  validate(instance_);
}

std::vector<AgentId> RelayEnv::agents() const {
  return {{kSender, AgentRole::kBoth}, {kReceiver, AgentRole::kBoth}};
}

PatternSpec RelayEnv::default_pattern() const {
  return PatternSpec::FixedOrder({kSender, kReceiver});
}

std::string RelayEnv::key_token(int index) const {
  const auto& f = instance_.facts.at(index);
  return f.tokens[f.key_position];
}

TokenList RelayEnv::fact_message(int index, bool repeat) const {
  const auto& f = instance_.facts.at(index);
  if (!repeat) return f.tokens;
  TokenList out{f.tokens[f.key_position]};
  for (int k = 0; k < static_cast<int>(f.tokens.size()); ++k) {
    if (k != f.key_position) out.push_back(f.tokens[k]);
  }
  return out;
}

RelayEnv::Progress RelayEnv::progress(const Transcript& history) const {
  Progress p;
  for (const auto& m : history.turns) {
    if (m.author != kReceiver) continue;
    if (is_ack(m.delivered_tokens())) {
      ++p.acked;
      p.repeat = false;
    } else {
      p.repeat = true;
      if (instance_.miss_mode == MissMode::kFail) p.failed = true;
    }
  }
  return p;
}

StepResult RelayEnv::step(const Transcript& t) const {
  if (t.turns.empty() || t.turns.back().author != kReceiver) {
    return StepResult::Continue();
  }
  const auto p = progress(t);
  if (p.failed) return StepResult::Terminal(0.0);
  if (p.acked >= static_cast<int>(instance_.facts.size())) {
    return StepResult::Terminal(1.0);
  }
  return StepResult::Continue();
}

ChatExchange RelayEnv::build_exchange(const std::string& agent,
                                      const Transcript& history,
                                      bool concise) const {
  std::string system =
      agent == kSender
          ? "Relay each fact to the receiver exactly, one fact per message."
          : "Reply \"got it\" when you have received the fact's key token, "
            "otherwise ask for a repeat.";
  if (concise) system = concise_instruction() + "\n" + system;
  return history_exchange(agent, system, history);
}

std::string RelayEnv::scripted_message(const std::string& agent,
                                       const Transcript& history) const {
  const auto p = progress(history);
  const int n = static_cast<int>(instance_.facts.size());
  if (agent == kSender) {
    if (p.acked >= n) return "that is everything";
    return join_tokens(fact_message(p.acked, p.repeat));
  }
  if (agent != kReceiver) throw ConfigError("relay has no agent " + agent);
  for (auto it = history.turns.rbegin(); it != history.turns.rend(); ++it) {
    if (it->author != kSender) continue;
    const auto d = it->delivered_tokens();
    if (p.acked < n &&
        std::find(d.begin(), d.end(), key_token(p.acked)) != d.end()) {
      return std::string(kAck);
    }
    break;
  }
  return join_tokens(clarification(instance_.clarification_length));
}

bool RelayEnv::key_delivered(const PolicyContext& ctx) const {
  if (ctx.listener != kReceiver || ctx.speaker != kSender) return false;
  const auto p = progress(ctx.history);
  if (p.acked >= static_cast<int>(instance_.facts.size())) return true;
  const auto prefix = flatten(ctx.current_chunks);
  return std::find(prefix.begin(), prefix.end(), key_token(p.acked)) !=
         prefix.end();
}

}  // namespace intercomm
