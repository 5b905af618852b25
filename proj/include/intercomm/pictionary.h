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

// Text pictionary: a describer sends clues about a secret entity, a guesser
// names it. Naming the entity wins; the describer saying it loses.
//
// Each instance carries a small vocabulary of candidates that share the
// attribute layout of the secret. The scripted guesser keeps every
// candidate consistent with the clue prefixes it has received and guesses
// once exactly one is left. Distractors are built so that the first
// `identifying_prefix` description tokens are needed and sufficient.

#ifndef INTERCOMM_PICTIONARY_H_
#define INTERCOMM_PICTIONARY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "intercomm/environment.h"

namespace intercomm {

struct PictionaryCandidate {
  std::string name;
  std::vector<TokenList> attributes;
  friend bool operator==(const PictionaryCandidate&,
                         const PictionaryCandidate&) = default;
};

struct PictionaryInstance {
  std::string id;
  std::string entity;
  std::vector<TokenList> attributes;
  std::vector<std::string> forbidden_surface_forms;
  std::vector<PictionaryCandidate> distractors;
  int identifying_prefix = 0;  // k*, in description tokens

  int description_length() const;
  TokenList description() const;
  friend bool operator==(const PictionaryInstance&,
                         const PictionaryInstance&) = default;
};

/// Throws StructuralError when an attribute leaks a forbidden form, the
/// distractors do not share the attribute layout, or the secret is not
/// identified by exactly `identifying_prefix` tokens.
void validate(const PictionaryInstance& instance);

struct PictionaryGenOptions {
  int description_tokens = 80;
  int attribute_count = 5;
  double min_fraction = 0.45;  // k* / description length
  double max_fraction = 0.75;
  int distractors = 6;
};

PictionaryInstance gen_pictionary_instance(std::uint64_t seed,
                                           const PictionaryGenOptions& options =
                                               {});

/// Lowercase with surrounding punctuation stripped.
std::string normalize_token(std::string_view token);

/// Length of the identifying prefix computed by brute force over the
/// candidates: the smallest k such that only the secret agrees with the
/// first k description tokens.
int brute_force_identifying_prefix(const PictionaryInstance& instance);

class PictionaryEnv final : public Environment {
 public:
  static constexpr const char* kDescriber = "describer";
  static constexpr const char* kGuesser = "guesser";

  /// clues_per_turn = 0: the describer sends everything not yet fully
  /// delivered; k > 0: at most k attributes per turn.
  explicit PictionaryEnv(PictionaryInstance instance, int clues_per_turn = 0);

  std::string task_name() const override { return "pictionary"; }
  std::vector<AgentId> agents() const override;
  PatternSpec default_pattern() const override;
  std::string interruptor() const override { return kGuesser; }
  StepResult step(const Transcript& transcript) const override;
  ChatExchange build_exchange(const std::string& agent,
                              const Transcript& history,
                              bool concise) const override;
  std::string scripted_message(const std::string& agent,
                               const Transcript& history) const override;
  bool key_delivered(const PolicyContext& context) const override;

  const PictionaryInstance& instance() const { return instance_; }

  /// Per-attribute delivered prefix lengths after `history`, plus the
  /// optional in-flight describer prefix.
  std::vector<int> evidence(const Transcript& history,
                            const TokenList* in_flight = nullptr) const;

  /// Names of the candidates (secret included) consistent with `evidence`.
  std::vector<std::string> consistent(const std::vector<int>& evidence) const;

  bool leaks(const TokenList& tokens) const;
  bool names_entity(const TokenList& tokens) const;

 private:
  /// First attribute index and count the describer sends after `history`.
  std::pair<int, int> next_span(const std::vector<int>& evidence) const;
  void apply(std::vector<int>& evidence, const TokenList& delivered) const;

  PictionaryInstance instance_;
  int clues_per_turn_;
};

}  // namespace intercomm

#endif  // INTERCOMM_PICTIONARY_H_
