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

// The interruptible speaking protocol.
//
// A speaker generates its whole message, the engine cuts it into chunks and
// offers them one at a time to every listener of the turn. After each chunk
// each listener with a policy emits one Yes/No decision. The first Yes halts
// the speaker: the chunk that triggered it is delivered, nothing after it.
//
// A conversation is a loop of turns. Slots come from decompose(); a round
// is one pass over them. After each turn the environment decides whether
// the conversation is over.

#ifndef INTERCOMM_PROTOCOL_H_
#define INTERCOMM_PROTOCOL_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "intercomm/backend.h"
#include "intercomm/environment.h"
#include "intercomm/error.h"
#include "intercomm/pattern.h"
#include "intercomm/policy.h"
#include "intercomm/transcript.h"

namespace intercomm {

struct SpeakerState {
  enum class Phase { kGenerating, kHalted, kDone };
  Phase phase = Phase::kGenerating;
  int chunk = 1;  // next chunk while generating, the last one sent if halted

  static SpeakerState Generating(int next) { return {Phase::kGenerating, next}; }
  static SpeakerState Halted(int at) { return {Phase::kHalted, at}; }
  static SpeakerState Done() { return {Phase::kDone, 0}; }
  friend bool operator==(const SpeakerState&, const SpeakerState&) = default;
};

/// Non-owning: null policy makes the channel non-interruptible for that
/// listener (no decision tokens).
using ListenerPolicies = std::map<std::string, InterruptionPolicy*>;

struct TurnOutcome {
  Message message;
  std::optional<std::string> interruptor;
  SpeakerState speaker_state;
};

/// Streams `tokens` from the group's speaker to its listeners. Listeners
/// decide in the group's declared order; on a tie the earliest listed wins.
TurnOutcome run_turn(const ChannelGroup& group, const TokenList& tokens,
                     const ListenerPolicies& policies,
                     const Transcript& history, int round);

enum class Termination { kMaxRounds, kTaskSignal, kEither };

struct ConversationConfig {
  int max_rounds = 10;
  int chunk_size = 16;
  std::uint64_t seed = 0;
  Termination termination = Termination::kEither;
};

void validate(const ConversationConfig& config);

struct Participant {
  AgentId id;
  AgentBackend* backend = nullptr;       // not owned
  InterruptionPolicy* policy = nullptr;  // not owned; null = generic
  bool concise = false;
};

/// One turn waiting to be spoken.
struct TurnSlot {
  ChannelGroup group;
  bool response = false;  // inserted after an interruption or broadcast

  friend bool operator==(const TurnSlot&, const TurnSlot&) = default;
};

/// Everything needed to resume a conversation. Plain value; copying it
/// forks the conversation.
struct ConversationState {
  Transcript transcript;
  std::size_t cursor = 0;  // next base slot
  std::deque<TurnSlot> pending;
  int round = 1;
  bool finished = false;
  std::optional<Reward> latched;  // first task signal under kMaxRounds
};

/// A generated message waiting to be streamed.
struct PendingTurn {
  TurnSlot slot;
  int round = 1;
  TokenList tokens;
  std::vector<Chunk> chunks;

  int chunk_count() const { return static_cast<int>(chunks.size()); }
};

/// Backend failure mid-conversation. Carries the transcript so far.
class ConversationAborted : public Error {
 public:
  ConversationAborted(const std::string& what, Transcript partial)
      : Error(what), partial_(std::move(partial)) {}
  const Transcript& partial() const { return partial_; }

 private:
  Transcript partial_;
};

class Conversation {
 public:
  Conversation(ConversationConfig config, PatternSpec pattern,
               std::vector<Participant> participants, const Environment& env);
  Conversation(ConversationConfig config, PatternSpec pattern,
               std::vector<Participant> participants, const Environment& env,
               ConversationState state);

  const ConversationState& state() const { return state_; }
  const Transcript& transcript() const { return state_.transcript; }
  bool finished() const { return state_.finished; }
  const std::vector<ChannelGroup>& slots() const { return slots_; }
  const ConversationConfig& config() const { return config_; }

  /// Picks the next slot and generates its message. Returns nullopt, and
  /// finishes the conversation, once max_rounds is exhausted.
  std::optional<PendingTurn> next_turn();

  /// Streams under the participants' policies.
  TurnOutcome stream(const PendingTurn& turn);

  /// Streams with `listener` cut at chunk `cut` (cut >= n: full delivery).
  /// Every other listener with a policy says No.
  TurnOutcome force(const PendingTurn& turn, const std::string& listener,
                    int cut) const;

  /// Appends the turn, consults the environment and advances the schedule.
  void commit(const PendingTurn& turn, const TurnOutcome& outcome);

  /// Runs to the end and returns the final transcript.
  Transcript run();

  /// Would `agent` hear the given turn with interruption rights?
  bool listens_with_policy(const PendingTurn& turn,
                           const std::string& agent) const;

 private:
  const Participant& participant(const std::string& name) const;
  ListenerPolicies policies_for(const ChannelGroup& group) const;
  void finish(std::optional<Reward> reward);
  std::optional<TurnSlot> pop_slot();
  void route_after(const PendingTurn& turn, const TurnOutcome& outcome);

  ConversationConfig config_;
  PatternSpec pattern_;
  std::vector<Participant> participants_;
  const Environment& env_;
  std::vector<ChannelGroup> slots_;
  ConversationState state_;
};

/// Convenience wrapper around Conversation::run().
Transcript run_conversation(const ConversationConfig& config,
                            const PatternSpec& pattern,
                            const std::vector<Participant>& participants,
                            const Environment& env);

}  // namespace intercomm

#endif  // INTERCOMM_PROTOCOL_H_
