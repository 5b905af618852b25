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

#include "intercomm/protocol.h"

#include <algorithm>
#include <set>
#include <span>

#include <spdlog/spdlog.h>

namespace intercomm {

namespace {

InterruptionDecision safe_decide(InterruptionPolicy& policy,
                                 const PolicyContext& ctx) {
  try {
    auto d = policy.decide(ctx);
    validate(d);
    return d;
  } catch (const std::exception& e) {
    spdlog::warn("listener {}: policy {} failed ({}), using fallback",
                 ctx.listener, policy.name(), e.what());
    return policy.fallback();
  }
}

Message blank_message(const ChannelGroup& group, int round,
                      std::vector<Chunk> chunks) {
  Message m;
  m.author = group.speaker();
  m.round = round;
  m.chunk_size = group.channels.front().chunk_size;
  m.chunks = std::move(chunks);
  return m;
}

}  // namespace

TurnOutcome run_turn(const ChannelGroup& group, const TokenList& tokens,
                     const ListenerPolicies& policies,
                     const Transcript& history, int round) {
  if (group.channels.empty()) throw StructuralError("turn without listeners");
  const int chunk_size = group.channels.front().chunk_size;
  TurnOutcome out{blank_message(group, round, chunk_message(tokens, chunk_size)),
                  std::nullopt, SpeakerState::Done()};
  Message& msg = out.message;
  const int n = msg.chunk_count();
  if (n == 0) return out;

  std::vector<std::pair<std::string, InterruptionPolicy*>> active;
  for (const auto& l : group.listeners()) {
    const auto it = policies.find(l);
    if (it != policies.end() && it->second) active.emplace_back(l, it->second);
  }
  for (auto& [name, p] : active) p->begin_turn(n);

  for (int i = 1; i <= n; ++i) {
    const std::span<const Chunk> prefix(msg.chunks.data(), i);
    std::optional<std::string> first;
    for (auto& [name, p] : active) {
      const PolicyContext ctx{history, prefix, round, i, n, name, msg.author};
      const auto d = safe_decide(*p, ctx);
      msg.decisions.push_back(DecisionToken{name, i, d.interrupt});
      if (d.interrupt && !first) first = name;
    }
    if (first && i < n) {
      msg.truncated_at = i;
      out.interruptor = std::move(first);
      out.speaker_state = SpeakerState::Halted(i);
      return out;
    }
  }
  return out;
}

void validate(const ConversationConfig& c) {
  if (c.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (c.chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
}

Conversation::Conversation(ConversationConfig config, PatternSpec pattern,
                           std::vector<Participant> participants,
                           const Environment& env)
    : Conversation(std::move(config), std::move(pattern),
                   std::move(participants), env, ConversationState{}) {}

Conversation::Conversation(ConversationConfig config, PatternSpec pattern,
                           std::vector<Participant> participants,
                           const Environment& env, ConversationState state)
    : config_(std::move(config)),
      pattern_(std::move(pattern)),
      participants_(std::move(participants)),
      env_(env),
      state_(std::move(state)) {
  validate(config_);
  slots_ = decompose(pattern_, config_.chunk_size);
  std::set<std::string> names;
  for (const auto& p : participants_) {
    if (!names.insert(p.id.name).second) {
      throw ConfigError("agent registered twice: " + p.id.name);
    }
  }
  for (const auto& g : slots_) {
    const auto& s = participant(g.speaker());
    if (!s.id.can_speak()) {
      throw ConfigError("agent " + s.id.name + " cannot speak");
    }
    if (!s.backend) throw ConfigError("agent " + s.id.name + " has no backend");
    for (const auto& l : g.listeners()) {
      const auto& lp = participant(l);
      if (lp.policy && !lp.id.can_listen()) {
        throw ConfigError("agent " + l + " cannot listen");
      }
    }
  }
}

const Participant& Conversation::participant(const std::string& name) const {
  for (const auto& p : participants_) {
    if (p.id.name == name) return p;
  }
  throw ConfigError("agent not registered: " + name);
}

ListenerPolicies Conversation::policies_for(const ChannelGroup& group) const {
  ListenerPolicies out;
  for (const auto& l : group.listeners()) out[l] = participant(l).policy;
  return out;
}

bool Conversation::listens_with_policy(const PendingTurn& turn,
                                       const std::string& agent) const {
  const auto ls = turn.slot.group.listeners();
  return std::find(ls.begin(), ls.end(), agent) != ls.end() &&
         participant(agent).policy != nullptr;
}

std::optional<TurnSlot> Conversation::pop_slot() {
  if (!state_.pending.empty()) {
    TurnSlot s = std::move(state_.pending.front());
    state_.pending.pop_front();
    return s;
  }
  if (state_.cursor >= slots_.size()) {
    state_.cursor = 0;
    ++state_.round;
  }
  if (state_.round > config_.max_rounds) return std::nullopt;
  return TurnSlot{slots_[state_.cursor++], false};
}

void Conversation::finish(std::optional<Reward> reward) {
  state_.finished = true;
  state_.transcript.reward = reward;
}

std::optional<PendingTurn> Conversation::next_turn() {
  if (state_.finished) return std::nullopt;
  auto slot = pop_slot();
  if (!slot) {
    switch (config_.termination) {
      case Termination::kTaskSignal:
        throw ConversationAborted(
            "max_rounds reached without a task signal", state_.transcript);
      case Termination::kMaxRounds:
        finish(state_.latched ? state_.latched
                              : Reward(env_.timeout_reward(state_.transcript)));
        break;
      case Termination::kEither:
        finish(Reward(env_.timeout_reward(state_.transcript)));
        break;
    }
    return std::nullopt;
  }
  const auto& speaker = participant(slot->group.speaker());
  SpeakRequest req;
  req.agent = speaker.id.name;
  req.history = &state_.transcript;
  req.round = state_.round;
  TokenList tokens;
  try {
    req.exchange =
        env_.build_exchange(req.agent, state_.transcript, speaker.concise);
    tokens = generate_message(*speaker.backend, req);
  } catch (const std::exception& e) {
    throw ConversationAborted("agent " + req.agent + ": " + e.what(),
                              state_.transcript);
  }
  PendingTurn turn{std::move(*slot), state_.round, std::move(tokens), {}};
  turn.chunks = chunk_message(turn.tokens, config_.chunk_size);
  return turn;
}

TurnOutcome Conversation::stream(const PendingTurn& turn) {
  return run_turn(turn.slot.group, turn.tokens, policies_for(turn.slot.group),
                  state_.transcript, turn.round);
}

TurnOutcome Conversation::force(const PendingTurn& turn,
                                const std::string& listener, int cut) const {
  const auto& group = turn.slot.group;
  TurnOutcome out{blank_message(group, turn.round, turn.chunks), std::nullopt,
                  SpeakerState::Done()};
  Message& msg = out.message;
  const int n = msg.chunk_count();
  std::vector<std::string> deciders;
  for (const auto& l : group.listeners()) {
    if (l == listener || participant(l).policy) deciders.push_back(l);
  }
  for (int i = 1; i <= n; ++i) {
    const bool cut_here = i == cut && cut < n;
    for (const auto& l : deciders) {
      msg.decisions.push_back(DecisionToken{l, i, cut_here && l == listener});
    }
    if (cut_here) {
      msg.truncated_at = i;
      out.interruptor = listener;
      out.speaker_state = SpeakerState::Halted(i);
      break;
    }
  }
  return out;
}

void Conversation::route_after(const PendingTurn& turn,
                               const TurnOutcome& outcome) {
  const auto& g = turn.slot.group;
  const int cs = config_.chunk_size;
  if (pattern_.kind == PatternKind::kBroadcast && !turn.slot.response) {
    const auto& speaker = g.speaker();
    if (outcome.interruptor) {
      state_.pending.push_back(
          {{{Channel{*outcome.interruptor, speaker, cs}}, false}, true});
    } else {
      for (const auto& l : g.listeners()) {
        state_.pending.push_back({{{Channel{l, speaker, cs}}, false}, true});
      }
    }
    return;
  }
  if (!outcome.interruptor || turn.slot.response) return;
  if (env_.routing() == Routing::kContinueOrder) return;
  const std::string* next = nullptr;
  if (!state_.pending.empty()) {
    next = &state_.pending.front().group.speaker();
  } else {
    next = &slots_[state_.cursor % slots_.size()].speaker();
  }
  if (*next == *outcome.interruptor) return;
  state_.pending.push_front(
      {{{Channel{*outcome.interruptor, g.speaker(), cs}}, false}, true});
}

void Conversation::commit(const PendingTurn& turn,
                          const TurnOutcome& outcome) {
  if (state_.finished) throw StructuralError("conversation already finished");
  state_.transcript.turns.push_back(outcome.message);
  state_.transcript.terminal_round = turn.round;
  const auto step = env_.step(state_.transcript);
  if (step.terminal) {
    if (config_.termination == Termination::kMaxRounds) {
      if (!state_.latched) state_.latched = step.reward.value_or(Reward{});
    } else {
      finish(step.reward.value_or(Reward{}));
      return;
    }
  }
  route_after(turn, outcome);
}

Transcript Conversation::run() {
  while (!state_.finished) {
    auto turn = next_turn();
    if (!turn) break;
    commit(*turn, stream(*turn));
  }
  return state_.transcript;
}

Transcript run_conversation(const ConversationConfig& config,
                            const PatternSpec& pattern,
                            const std::vector<Participant>& participants,
                            const Environment& env) {
  return Conversation(config, pattern, participants, env).run();
}

}  // namespace intercomm
