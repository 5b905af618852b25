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

// Test-only environments and oracles shared by the unit and acceptance
// suites.

#ifndef INTERCOMM_TESTS_SUPPORT_H_
#define INTERCOMM_TESTS_SUPPORT_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "intercomm/environment.h"
#include "intercomm/payoff_tree.h"
#include "intercomm/protocol.h"
#include "intercomm/relay.h"
#include "intercomm/rng.h"

namespace intercomm::testing {

inline TokenList words(int n, const std::string& stem = "w") {
  TokenList out;
  for (int i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

// Speaker "a" sends `message_len` tokens, listener "b" answers with
// `reply_len` tokens; the game ends with reward 1 after b's `replies`-th
// answer.
class EchoEnv final : public Environment {
 public:
  EchoEnv(int message_len, int reply_len, int replies = 1)
      : message_len_(message_len), reply_len_(reply_len), replies_(replies) {}

  std::string task_name() const override { return "echo"; }
  std::vector<AgentId> agents() const override {
    return {{"a", AgentRole::kBoth}, {"b", AgentRole::kBoth}};
  }
  PatternSpec default_pattern() const override {
    return PatternSpec::FixedOrder({"a", "b"});
  }
  std::string interruptor() const override { return "b"; }
  StepResult step(const Transcript& t) const override {
    int n = 0;
    for (const auto& m : t.turns) n += m.author == "b";
    return n >= replies_ ? StepResult::Terminal(1.0) : StepResult::Continue();
  }
  ChatExchange build_exchange(const std::string& agent, const Transcript& h,
                              bool) const override {
    return history_exchange(agent, "echo", h);
  }
  std::string scripted_message(const std::string& agent,
                               const Transcript&) const override {
    return join_tokens(agent == "a" ? words(message_len_)
                                    : words(reply_len_, "r"));
  }
  bool key_delivered(const PolicyContext&) const override { return false; }

 private:
  int message_len_;
  int reply_len_;
  int replies_;
};

// Agents talk in pattern order with pseudo-random message lengths (0..max)
// and stop after a seed-chosen number of turns.
class RandomTalkEnv final : public Environment {
 public:
  RandomTalkEnv(std::uint64_t seed, std::vector<std::string> agents,
                PatternSpec pattern, int max_len, int min_len = 0)
      : seed_(seed), agents_(std::move(agents)), pattern_(std::move(pattern)),
        max_len_(max_len), min_len_(min_len) {
    Rng rng(derive_seed(seed, "stop"));
    stop_after_ = uniform_int(rng, 1, 14);
    reward_ = uniform_int(rng, 0, 1);
  }

  std::string task_name() const override { return "random-talk"; }
  std::vector<AgentId> agents() const override {
    std::vector<AgentId> out;
    for (const auto& a : agents_) out.push_back({a, AgentRole::kBoth});
    return out;
  }
  PatternSpec default_pattern() const override { return pattern_; }
  std::string interruptor() const override { return agents_.back(); }
  void set_stop_after(int turns) { stop_after_ = turns; }
  StepResult step(const Transcript& t) const override {
    if (static_cast<int>(t.turns.size()) >= stop_after_) {
      return StepResult::Terminal(reward_);
    }
    return StepResult::Continue();
  }
  ChatExchange build_exchange(const std::string& agent, const Transcript& h,
                              bool) const override {
    return history_exchange(agent, "talk", h);
  }
  std::string scripted_message(const std::string& agent,
                               const Transcript& h) const override {
    Rng rng(derive_seed(seed_, hash_string(agent), h.turns.size()));
    return join_tokens(words(uniform_int(rng, min_len_, max_len_), agent + "_"));
  }
  bool key_delivered(const PolicyContext&) const override { return false; }

 private:
  std::uint64_t seed_;
  std::vector<std::string> agents_;
  PatternSpec pattern_;
  int max_len_;
  int min_len_;
  int stop_after_ = 1;
  double reward_ = 0.0;
};

// Records the chunk count of every turn it hears and forwards decisions.
class RecordingPolicy final : public InterruptionPolicy {
 public:
  explicit RecordingPolicy(std::unique_ptr<InterruptionPolicy> inner)
      : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  void begin_turn(int n) override {
    heard.push_back(n);
    inner_->begin_turn(n);
  }
  InterruptionDecision decide(const PolicyContext& ctx) override {
    ++decisions;
    auto d = inner_->decide(ctx);
    if (d.interrupt && ctx.chunk_index < ctx.total_chunks) {
      cuts.emplace_back(static_cast<int>(heard.size()), ctx.chunk_index);
    }
    return d;
  }

  std::vector<int> heard;
  std::vector<std::pair<int, int>> cuts;  // (heard turn, chunk) of each Yes
  std::int64_t decisions = 0;

 private:
  std::unique_ptr<InterruptionPolicy> inner_;
};

// Independent cost ledger: counts generated words and decisions as they
// happen, without looking at the transcript.
class CostLog {
 public:
  explicit CostLog(int chunk_size) : chunk_size_(chunk_size) {}

  void speak(std::int64_t words) {
    close();
    open_ = true;
    len_ = words;
    cut_ = 0;
  }
  void decision(int chunk, int total, bool yes) {
    ++decisions_;
    if (yes && chunk < total && cut_ == 0) cut_ = chunk;
  }
  std::int64_t total() {
    close();
    return delivered_ + decisions_;
  }
  std::int64_t decisions() const { return decisions_; }

 private:
  void close() {
    if (!open_) return;
    delivered_ += cut_ ? std::min<std::int64_t>(len_, std::int64_t{cut_} * chunk_size_)
                       : len_;
    open_ = false;
  }

  int chunk_size_;
  bool open_ = false;
  std::int64_t len_ = 0;
  int cut_ = 0;
  std::int64_t delivered_ = 0;
  std::int64_t decisions_ = 0;
};

class LoggingBackend final : public AgentBackend {
 public:
  LoggingBackend(std::unique_ptr<AgentBackend> inner, CostLog& log)
      : inner_(std::move(inner)), log_(log) {}
  std::string complete(const SpeakRequest& r) override {
    auto text = inner_->complete(r);
    std::istringstream in(text);
    std::int64_t n = 0;
    for (std::string w; in >> w;) ++n;
    log_.speak(n);
    return text;
  }
  double score_affirmative(const ChatExchange& e) override {
    return inner_->score_affirmative(e);
  }

 private:
  std::unique_ptr<AgentBackend> inner_;
  CostLog& log_;
};

class LoggingPolicy final : public InterruptionPolicy {
 public:
  LoggingPolicy(std::unique_ptr<InterruptionPolicy> inner, CostLog& log)
      : inner_(std::move(inner)), log_(log) {}
  std::string name() const override { return inner_->name(); }
  void begin_turn(int n) override { inner_->begin_turn(n); }
  InterruptionDecision decide(const PolicyContext& ctx) override {
    auto d = inner_->decide(ctx);
    log_.decision(ctx.chunk_index, ctx.total_chunks, d.interrupt);
    return d;
  }

 private:
  std::unique_ptr<InterruptionPolicy> inner_;
  CostLog& log_;
};

struct RandomRun {
  Transcript transcript;
  std::int64_t engine_cost = 0;
  std::int64_t oracle_cost = 0;
  bool aborted = false;
};

// One conversation over a random pattern, chunk size, round limit and
// random interruption policies, with its cost tracked by CostLog.
inline RandomRun random_conversation(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "case"));
  const int k = uniform_int(rng, 2, 4);
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i) names.push_back("ag" + std::to_string(i));
  PatternSpec pattern;
  switch (uniform_int(rng, 0, 3)) {
    case 0:
      pattern = PatternSpec::FixedOrder(names, uniform_int(rng, 0, 1) == 1);
      break;
    case 1:
      pattern = PatternSpec::Broadcast(
          names[0], std::vector<std::string>(names.begin() + 1, names.end()));
      break;
    case 2:
      names.resize(2);
      pattern = PatternSpec::Mutual(names[0], names[1]);
      break;
    default:
      pattern = PatternSpec::GroupChat(names);
      break;
  }
  ConversationConfig config;
  config.chunk_size = uniform_int(rng, 1, 8);
  config.max_rounds = uniform_int(rng, 1, 5);
  config.seed = seed;
  config.termination = static_cast<Termination>(uniform_int(rng, 0, 2));
  RandomTalkEnv env(seed, names, pattern, 30);

  CostLog log(config.chunk_size);
  std::vector<std::unique_ptr<AgentBackend>> backends;
  std::vector<std::unique_ptr<InterruptionPolicy>> policies;
  std::vector<Participant> parts;
  for (const auto& a : env.agents()) {
    backends.push_back(std::make_unique<LoggingBackend>(
        make_scripted_backend(env, a.name), log));
    InterruptionPolicy* p = nullptr;
    if (uniform_int(rng, 0, 3) > 0) {
      policies.push_back(std::make_unique<LoggingPolicy>(
          std::make_unique<RandomInterrupt>(derive_seed(seed, a.name)), log));
      p = policies.back().get();
    }
    parts.push_back({a, backends.back().get(), p, false});
  }
  RandomRun out;
  try {
    out.transcript = run_conversation(config, pattern, parts, env);
  } catch (const ConversationAborted& e) {
    out.transcript = e.partial();
    out.aborted = true;
  }
  out.engine_cost = cost_of(out.transcript);
  out.oracle_cost = log.total();
  return out;
}

// A conversation setup over scripted agents.
struct ScriptedCase {
  std::unique_ptr<Environment> env;
  ConversationConfig config;
  PatternSpec pattern;
};

struct OracleRun {
  std::int64_t cost = 0;
  double reward = 0.0;
  std::vector<int> heard;  // chunk counts of the interruptor's heard turns
};

// Full conversation where the interruptor cuts its k-th heard turn at
// choices[k] and never interrupts afterwards.
inline OracleRun oracle_run(const ScriptedCase& c,
                            const std::vector<int>& choices) {
  std::vector<std::unique_ptr<AgentBackend>> backends;
  std::vector<Participant> parts;
  const std::string key = c.env->interruptor();
  auto rec = std::make_unique<RecordingPolicy>(
      std::make_unique<ChoiceSequencePolicy>(choices,
                                             std::make_unique<NeverInterrupt>()));
  for (const auto& a : c.env->agents()) {
    backends.push_back(make_scripted_backend(*c.env, a.name));
    parts.push_back({a, backends.back().get(),
                     a.name == key ? rec.get() : nullptr, false});
  }
  OracleRun out;
  try {
    const auto t = run_conversation(c.config, c.pattern, parts, *c.env);
    out.cost = cost_of(t);
    out.reward = t.reward.value_or(Reward{}).value;
  } catch (const ConversationAborted& e) {
    out.cost = cost_of(e.partial());
    out.reward = 0.0;
  }
  out.heard = rec->heard;
  return out;
}

struct OracleLabel {
  double delta_cost = 0.0;
  double delta_perf = 0.0;
  Label label = Label::kNegative;
};

inline std::string path_id(const std::vector<int>& path) {
  std::string s;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k) s += '.';
    s += std::to_string(path[k]);
  }
  return s;
}

// Exhaustive enumeration of every interruption choice sequence. Keys are
// branch ids in the tree's "2.3" form.
inline std::map<std::string, OracleLabel> enumerate_labels(
    const ScriptedCase& c) {
  std::map<std::string, OracleLabel> out;
  std::map<std::vector<int>, OracleRun> memo;
  auto run = [&](const std::vector<int>& p) -> const OracleRun& {
    auto it = memo.find(p);
    if (it == memo.end()) it = memo.emplace(p, oracle_run(c, p)).first;
    return it->second;
  };
  std::vector<std::vector<int>> stack{{}};
  while (!stack.empty()) {
    const auto path = stack.back();
    stack.pop_back();
    const auto heard = run(path).heard;
    if (heard.size() <= path.size()) continue;
    const int n = heard[path.size()];
    auto full = path;
    full.push_back(n);
    const auto& base = run(full);
    for (int i = 1; i <= n; ++i) {
      auto p = path;
      p.push_back(i);
      const auto& r = run(p);
      OracleLabel l;
      // Decision tokens of the branched turn itself are left out of both
      // sides: i of them on the cut branch, n on the full one.
      l.delta_cost = static_cast<double>((r.cost - i) - (base.cost - n));
      l.delta_perf = r.reward - base.reward;
      l.label = l.delta_cost < 0 && l.delta_perf >= 0 ? Label::kPositive
                                                      : Label::kNegative;
      out[path_id(p)] = l;
      stack.push_back(p);
    }
  }
  return out;
}

inline ScriptedCase make_case(std::unique_ptr<Environment> env, int chunk,
                              int rounds) {
  ScriptedCase c;
  c.pattern = env->default_pattern();
  c.env = std::move(env);
  c.config.chunk_size = chunk;
  c.config.max_rounds = rounds;
  return c;
}

// One relay fact of `len` filler tokens with its key at `key_pos`.
inline RelayInstance single_fact(int len, int key_pos, int clarification,
                                 MissMode mode = MissMode::kExtraRound) {
  RelayInstance inst;
  inst.id = "fact-" + std::to_string(len) + "-" + std::to_string(key_pos);
  RelayFact f;
  f.tokens = words(len, "f");
  f.tokens[key_pos] = "#key1";
  f.key_position = key_pos;
  inst.facts = {f};
  inst.clarification_length = clarification;
  inst.miss_mode = mode;
  return inst;
}

inline TreeSetup tree_setup(const ScriptedCase& c,
                            std::vector<std::unique_ptr<AgentBackend>>& own) {
  TreeSetup s;
  s.env = c.env.get();
  s.config = c.config;
  s.pattern = c.pattern;
  for (const auto& a : c.env->agents()) {
    own.push_back(make_scripted_backend(*c.env, a.name));
    s.backends[a.name] = own.back().get();
  }
  s.rollout_policy = never_rollouts(c.env->interruptor());
  return s;
}

}  // namespace intercomm::testing

#endif  // INTERCOMM_TESTS_SUPPORT_H_
