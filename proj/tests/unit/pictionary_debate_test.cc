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

#include "doctest.h"
#include "intercomm/debate.h"
#include "intercomm/error.h"
#include "intercomm/pictionary.h"
#include "intercomm/protocol.h"
#include "intercomm/relay.h"
#include "support.h"

using namespace intercomm;

namespace {

// k* as one past the longest shared prefix with any distractor.
int oracle_prefix(const PictionaryInstance& inst) {
  const auto secret = inst.description();
  int longest = 0;
  for (const auto& d : inst.distractors) {
    TokenList other;
    for (const auto& a : d.attributes) other.insert(other.end(), a.begin(), a.end());
    int k = 0;
    while (k < static_cast<int>(secret.size()) && secret[k] == other[k]) ++k;
    longest = std::max(longest, k);
  }
  return longest + 1;
}

struct Played {
  Transcript transcript;
  bool aborted = false;
};

Played play(const Environment& env, const std::string& listener,
            InterruptionPolicy* policy, int chunk, int rounds = 10) {
  std::vector<std::unique_ptr<AgentBackend>> backends;
  std::vector<Participant> parts;
  for (const auto& a : env.agents()) {
    backends.push_back(make_scripted_backend(env, a.name));
    parts.push_back({a, backends.back().get(),
                     a.name == listener ? policy : nullptr, false});
  }
  ConversationConfig c;
  c.chunk_size = chunk;
  c.max_rounds = rounds;
  Played out;
  try {
    out.transcript = run_conversation(c, env.default_pattern(), parts, env);
  } catch (const ConversationAborted& e) {
    out.transcript = e.partial();
    out.aborted = true;
  }
  return out;
}

}  // namespace

TEST_CASE("pictionary instances identify the secret at k*") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto inst = gen_pictionary_instance(s);
    CHECK_NOTHROW(validate(inst));
    CHECK(inst.identifying_prefix == oracle_prefix(inst));
    CHECK(inst.identifying_prefix == brute_force_identifying_prefix(inst));
    const double frac =
        static_cast<double>(inst.identifying_prefix) / inst.description_length();
    CHECK(frac >= 0.45 - 0.05);
    CHECK(frac <= 0.75 + 0.05);
    PictionaryEnv env(inst);
    CHECK_FALSE(env.leaks(inst.description()));
  }
  CHECK(gen_pictionary_instance(3) == gen_pictionary_instance(3));
}

TEST_CASE("pictionary options shape the instance") {
  PictionaryGenOptions o;
  o.description_tokens = 40;
  o.attribute_count = 4;
  o.distractors = 3;
  const auto inst = gen_pictionary_instance(5, o);
  CHECK(inst.attributes.size() == 4);
  CHECK(inst.distractors.size() == 3);
  CHECK(inst.description_length() == 40);
}

TEST_CASE("pictionary validation catches leaks and bad layouts") {
  auto inst = gen_pictionary_instance(2);
  inst.attributes[0][0] = inst.entity;
  CHECK_THROWS_AS(validate(inst), StructuralError);
  inst = gen_pictionary_instance(2);
  inst.distractors[0].attributes[0].push_back("extra");
  CHECK_THROWS_AS(validate(inst), StructuralError);
  inst = gen_pictionary_instance(2);
  inst.identifying_prefix += 1;
  CHECK_THROWS_AS(validate(inst), StructuralError);
}

TEST_CASE("normalization and naming") {
  CHECK(normalize_token("Apple,") == "apple");
  CHECK(normalize_token("\"Quoted\".") == "quoted");
  const auto inst = gen_pictionary_instance(1);
  PictionaryEnv env(inst);
  CHECK(env.names_entity({"my", "guess", "is", inst.entity + "!"}));
  CHECK_FALSE(env.names_entity({"no", "idea"}));
}

TEST_CASE("oracle guesser cuts at the chunk that completes k*") {
  for (std::uint64_t s = 0; s < 25; ++s) {
    const auto inst = gen_pictionary_instance(s);
    PictionaryEnv env(inst);
    for (int c : {4, 8, 16}) {
      PredicatePolicy oracle("oracle", [&](const PolicyContext& ctx) {
        return env.key_delivered(ctx);
      });
      const auto r = play(env, PictionaryEnv::kGuesser, &oracle, c);
      REQUIRE_FALSE(r.aborted);
      CHECK(r.transcript.reward->value == 1.0);
      const auto& first = r.transcript.turns.front();
      const int want = (inst.identifying_prefix + c - 1) / c;
      if (want < first.chunk_count()) {
        CHECK(first.truncated_at == want);
      } else {
        CHECK_FALSE(first.truncated_at);
      }
      CHECK(r.transcript.turns.size() == 2);
    }
  }
}

TEST_CASE("never-interrupting guesser still wins, at full cost") {
  const auto inst = gen_pictionary_instance(8);
  PictionaryEnv env(inst);
  NeverInterrupt never;
  const auto r = play(env, PictionaryEnv::kGuesser, &never, 8);
  CHECK(r.transcript.reward->value == 1.0);
  CHECK(r.transcript.turns.front().delivered_token_count() ==
        inst.description_length());
}

TEST_CASE("clues per turn spreads the description") {
  const auto inst = gen_pictionary_instance(9);
  PictionaryEnv env(inst, 1);
  NeverInterrupt never;
  const auto r = play(env, PictionaryEnv::kGuesser, &never, 8);
  CHECK(r.transcript.reward->value == 1.0);
  CHECK(r.transcript.turns.size() > 2);
  CHECK(r.transcript.turns.front().full_token_count() ==
        static_cast<std::int64_t>(inst.attributes.front().size()));
}

TEST_CASE("debate instances and verdict blocks") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto inst = gen_debate_instance(s);
    CHECK_NOTHROW(validate(inst));
    CHECK(inst.pro_answer() != inst.con_answer());
  }
  const auto v = parse_verdict_block(format_verdict(Side::kCon, "(B)"));
  REQUIRE(v);
  CHECK(v->preference);
  CHECK(v->side == Side::kCon);
  const auto wait = parse_verdict_block(format_verdict(std::nullopt, ""));
  REQUIRE(wait);
  CHECK_FALSE(wait->preference);
  CHECK_FALSE(wait->side);
  CHECK_FALSE(parse_verdict_block("I think pro is right"));
  const auto loose = parse_verdict_block(
      "{'Supported Side': 'Pro', 'Whether there is a preference': 'Yes'}");
  REQUIRE(loose);
  CHECK(loose->side == Side::kPro);
}

TEST_CASE("debate moderator votes for the correct side") {
  for (std::uint64_t s = 0; s < 15; ++s) {
    DebateEnv env(gen_debate_instance(s));
    PredicatePolicy oracle("oracle", [&](const PolicyContext& ctx) {
      return env.key_delivered(ctx);
    });
    const auto withcut = play(env, DebateEnv::kModerator, &oracle, 8);
    NeverInterrupt never;
    const auto full = play(env, DebateEnv::kModerator, &never, 8);
    CHECK(withcut.transcript.reward->value == 1.0);
    CHECK(full.transcript.reward->value == 1.0);
    CHECK(cost_of(withcut.transcript) <= cost_of(full.transcript));
  }
}

TEST_CASE("a moderator that always waits runs out the clock") {
  DebateEnv env(gen_debate_instance(4), true);
  NeverInterrupt never;
  const auto r = play(env, DebateEnv::kModerator, &never, 8, 2);
  CHECK_FALSE(r.aborted);
  CHECK(r.transcript.reward->value == 0.0);
  CHECK(r.transcript.terminal_round == 2);
}

TEST_CASE("relay: a missed key costs a clarification round") {
  RelayInstance inst;
  inst.id = "relay-t";
  RelayFact f;
  f.tokens = intercomm::testing::words(11, "t");
  f.tokens.push_back("#k1");
  f.key_position = 11;
  inst.facts = {f};
  inst.clarification_length = 6;
  RelayEnv env(inst);
  CHECK(env.key_token(0) == "#k1");

  NeverInterrupt never;
  const auto full = play(env, RelayEnv::kReceiver, &never, 4);
  CHECK(full.transcript.reward->value == 1.0);
  // 12 tokens + 3 decisions, then "got it"
  CHECK(cost_of(full.transcript) == 12 + 3 + 2);

  ChoiceSequencePolicy early({1}, std::make_unique<NeverInterrupt>());
  const auto cut = play(env, RelayEnv::kReceiver, &early, 4);
  CHECK(cut.transcript.reward->value == 1.0);
  // 4 + 1, clarification 6, resend 12 + 3, ack 2
  CHECK(cost_of(cut.transcript) == 5 + 6 + 15 + 2);
  CHECK(env.fact_message(0, true).front() == "#k1");

  inst.miss_mode = MissMode::kFail;
  RelayEnv strict(inst);
  ChoiceSequencePolicy early2({1}, std::make_unique<NeverInterrupt>());
  const auto failed = play(strict, RelayEnv::kReceiver, &early2, 4);
  CHECK(failed.transcript.reward->value == 0.0);
}

TEST_CASE("relay generation honors placement") {
  RelayGenOptions o;
  o.facts = 3;
  o.min_tokens = 10;
  o.max_tokens = 14;
  o.placement = KeyPlacement::kEnd;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = gen_relay_instance(s, o);
    CHECK_NOTHROW(validate(inst));
    REQUIRE(inst.facts.size() == 3);
    for (const auto& f : inst.facts) {
      CHECK(f.tokens.size() >= 10);
      CHECK(f.tokens.size() <= 14);
      CHECK(f.key_position == static_cast<int>(f.tokens.size()) - 1);
    }
  }
  o.placement = KeyPlacement::kMiddle;
  const auto mid = gen_relay_instance(1, o);
  for (const auto& f : mid.facts) {
    CHECK(f.key_position == static_cast<int>(f.tokens.size()) / 2);
  }
}
