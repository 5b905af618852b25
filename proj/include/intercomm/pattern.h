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

// Communication patterns and their decomposition into directed channels.
//
//   FixedOrder(A, B, C)   A->B, B->C, C->A        (one turn each per round)
//   Broadcast(A, {B, C})  {A->B, A->C} parallel   (listeners reply to A)
//   Mutual(A, B)          A->B, B->A
//   GroupChat(A, B, C)    {A->B, A->C}, {B->A, B->C}, {C->A, C->B}
//
// GroupChat is every member broadcasting in turn, as in a moderated debate.

#ifndef INTERCOMM_PATTERN_H_
#define INTERCOMM_PATTERN_H_

#include <string>
#include <vector>

namespace intercomm {

enum class PatternKind { kFixedOrder, kBroadcast, kMutual, kGroupChat };

struct PatternSpec {
  PatternKind kind = PatternKind::kFixedOrder;
  // FixedOrder / GroupChat: the order. Broadcast: speaker then listeners.
  // Mutual: the pair.
  std::vector<std::string> agents;
  bool cycles = true;  // FixedOrder only: include a_k -> a_1

  static PatternSpec FixedOrder(std::vector<std::string> order,
                                bool cycles = true);
  static PatternSpec Broadcast(std::string speaker,
                               std::vector<std::string> listeners);
  static PatternSpec Mutual(std::string a, std::string b);
  static PatternSpec GroupChat(std::vector<std::string> members);

  friend bool operator==(const PatternSpec&, const PatternSpec&) = default;
};

/// Throws StructuralError for fewer than two agents, a speaker among its
/// own listeners, or a Mutual pair of equal names. FixedOrder may repeat an
/// agent (A, T, B, T) as long as no two adjacent entries coincide.
void validate(const PatternSpec& pattern);

struct Channel {
  std::string speaker;
  std::string listener;
  int chunk_size = 16;
  friend bool operator==(const Channel&, const Channel&) = default;
};

/// Channels that share one speaking turn. A parallel group streams the same
/// chunks to every listener at once.
struct ChannelGroup {
  std::vector<Channel> channels;
  bool parallel = false;

  const std::string& speaker() const { return channels.front().speaker; }
  std::vector<std::string> listeners() const;
  friend bool operator==(const ChannelGroup&, const ChannelGroup&) = default;
};

/// One group per speaking slot of a round, in speaking order.
std::vector<ChannelGroup> decompose(const PatternSpec& pattern, int chunk_size);

/// The groups' channels in order.
std::vector<Channel> flatten(const std::vector<ChannelGroup>& groups);

/// Every distinct agent name in first-appearance order.
std::vector<std::string> pattern_members(const PatternSpec& pattern);

std::string to_string(PatternKind kind);
std::string to_string(const PatternSpec& pattern);

/// Parses "fixed:a,b,c", "broadcast:s>l1,l2", "mutual:a,b", "group:a,b,c".
/// Throws ConfigError on malformed text.
PatternSpec parse_pattern(const std::string& text);

}  // namespace intercomm

#endif  // INTERCOMM_PATTERN_H_
