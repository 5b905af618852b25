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

// Listener-side interruption policies.
//
// The engine calls begin_turn() once before the first chunk of every turn
// the listener hears, then decide() once per received chunk until the
// first Yes or the end of the message. Each decide() costs one token.

#ifndef INTERCOMM_POLICY_H_
#define INTERCOMM_POLICY_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intercomm/backend.h"
#include "intercomm/prompts.h"
#include "intercomm/rng.h"
#include "intercomm/transcript.h"

namespace intercomm {

struct InterruptionDecision {
  bool interrupt = false;
  std::optional<double> score;  // p(Yes) when the policy has one

  friend bool operator==(const InterruptionDecision&,
                         const InterruptionDecision&) = default;
};

/// Throws StructuralError when the score lies outside [0, 1].
void validate(const InterruptionDecision& decision);

struct PolicyContext {
  const Transcript& history;            // turns before the current one
  std::span<const Chunk> current_chunks;  // chunks 1..chunk_index
  int round = 1;
  int chunk_index = 1;
  int total_chunks = 1;  // n of the current message
  std::string_view listener;
  std::string_view speaker;
};

class InterruptionPolicy {
 public:
  virtual ~InterruptionPolicy() = default;

  virtual std::string name() const = 0;
  virtual void begin_turn(int /*total_chunks*/) {}
  virtual InterruptionDecision decide(const PolicyContext& context) = 0;
  /// Decision used when decide() throws.
  virtual InterruptionDecision fallback() const { return {}; }
};

class NeverInterrupt final : public InterruptionPolicy {
 public:
  std::string name() const override { return "never"; }
  InterruptionDecision decide(const PolicyContext&) override { return {}; }
};

/// Uniform draw over {1..n}; n means deliver in full.
int random_plan(int n_chunks, Rng& rng);

/// Picks one point per turn with random_plan() and interrupts exactly there.
class RandomInterrupt final : public InterruptionPolicy {
 public:
  explicit RandomInterrupt(std::uint64_t seed) : rng_(seed) {}

  std::string name() const override { return "random"; }
  void begin_turn(int total_chunks) override;
  InterruptionDecision decide(const PolicyContext& context) override;

  int plan() const { return plan_; }

 private:
  Rng rng_;
  int plan_ = 0;
};

struct ThresholdRule {
  double theta = 0.5;

  ThresholdRule() = default;
  /// Throws ConfigError unless 0 <= theta <= 1.
  explicit ThresholdRule(double theta);
};

/// p_y >= theta.
bool threshold_decide(double p_y, const ThresholdRule& rule);

class ScoreSource {
 public:
  virtual ~ScoreSource() = default;
  virtual double score(const PolicyContext& context) = 0;
};

class FunctionScoreSource final : public ScoreSource {
 public:
  using Fn = std::function<double(const PolicyContext&)>;
  explicit FunctionScoreSource(Fn fn) : fn_(std::move(fn)) {}
  double score(const PolicyContext& context) override { return fn_(context); }

 private:
  Fn fn_;
};

/// Renders the interruption prompt and asks the backend for p(Yes).
class BackendScoreSource final : public ScoreSource {
 public:
  BackendScoreSource(AgentBackend& backend, PromptTemplate prompt,
                     std::string system_prompt = {});
  double score(const PolicyContext& context) override;

 private:
  AgentBackend& backend_;
  PromptTemplate prompt_;
  std::string system_prompt_;
};

class ThresholdPolicy final : public InterruptionPolicy {
 public:
  ThresholdPolicy(std::shared_ptr<ScoreSource> source, ThresholdRule rule);

  std::string name() const override;
  InterruptionDecision decide(const PolicyContext& context) override;

  const ThresholdRule& rule() const { return rule_; }

 private:
  std::shared_ptr<ScoreSource> source_;
  ThresholdRule rule_;
};

/// Leading "yes" or "no" (case-insensitive, after whitespace and any
/// opening quote or backtick) ending at a word boundary. nullopt otherwise.
std::optional<bool> parse_verdict(std::string_view text);

/// Exchange carrying the rendered interruption prompt as a single user turn.
ChatExchange interruption_exchange(const PromptTemplate& prompt,
                                   const PolicyContext& context,
                                   const std::string& system_prompt);

/// Asks the backend for a Yes/No completion with the interruption prompt.
class PromptPolicy final : public InterruptionPolicy {
 public:
  PromptPolicy(AgentBackend& backend, PromptTemplate prompt,
               std::string system_prompt = {});

  std::string name() const override { return "prompt"; }
  InterruptionDecision decide(const PolicyContext& context) override;

  std::int64_t parse_failures() const { return parse_failures_; }

 private:
  AgentBackend& backend_;
  PromptTemplate prompt_;
  std::string system_prompt_;
  std::int64_t parse_failures_ = 0;
};

/// Interrupts at fixed points: the k-th heard turn is cut at choices[k]
/// (a value >= n delivers in full). Turns past the end of the list are
/// handed to `then`, or never interrupted when it is null.
class ChoiceSequencePolicy final : public InterruptionPolicy {
 public:
  explicit ChoiceSequencePolicy(std::vector<int> choices,
                                std::unique_ptr<InterruptionPolicy> then = {});

  std::string name() const override { return "choices"; }
  void begin_turn(int total_chunks) override;
  InterruptionDecision decide(const PolicyContext& context) override;

  int turns_heard() const { return turns_heard_; }

 private:
  std::vector<int> choices_;
  std::unique_ptr<InterruptionPolicy> then_;
  int turns_heard_ = 0;
  std::optional<int> plan_;
};

/// Interrupts whenever the predicate holds for the received prefix.
class PredicatePolicy final : public InterruptionPolicy {
 public:
  using Predicate = std::function<bool(const PolicyContext&)>;
  PredicatePolicy(std::string name, Predicate predicate)
      : name_(std::move(name)), predicate_(std::move(predicate)) {}

  std::string name() const override { return name_; }
  InterruptionDecision decide(const PolicyContext& context) override {
    return {predicate_(context), std::nullopt};
  }

 private:
  std::string name_;
  Predicate predicate_;
};

/// Text of chunks 1..k joined by spaces.
std::string render_chunks(std::span<const Chunk> chunks);

}  // namespace intercomm

#endif  // INTERCOMM_POLICY_H_
