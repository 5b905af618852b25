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

#include <sstream>

#include "doctest.h"
#include "intercomm/error.h"
#include "intercomm/transcript.h"
#include "intercomm/transcript_io.h"
#include "support.h"

using namespace intercomm;
using intercomm::testing::words;

TEST_CASE("chunking splits into full chunks plus a short tail") {
  const auto chunks = chunk_message(words(10), 4);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].size() == 4);
  CHECK(chunks[1].size() == 4);
  CHECK(chunks[2].size() == 2);
  CHECK(chunks[0].index == 1);
  CHECK(chunks[2].index == 3);
  CHECK_FALSE(chunks[1].is_final);
  CHECK(chunks[2].is_final);
  CHECK(flatten(chunks) == words(10));
}

TEST_CASE("chunking edge cases") {
  CHECK(chunk_message({}, 4).empty());
  CHECK(chunk_message(words(8), 4).size() == 2);
  CHECK(chunk_message(words(3), 16).size() == 1);
  CHECK_THROWS_AS(chunk_message(words(3), 0), StructuralError);
}

TEST_CASE("chunk count is ceil(L / c) for every length") {
  for (int len = 0; len <= 40; ++len) {
    for (int c = 1; c <= 9; ++c) {
      const auto chunks = chunk_message(words(len), c);
      CHECK(static_cast<int>(chunks.size()) == (len + c - 1) / c);
      CHECK(static_cast<int>(flatten(chunks).size()) == len);
    }
  }
}

TEST_CASE("message cost is delivered tokens plus decision tokens") {
  const auto full = make_message("a", 1, words(10), 4, std::nullopt,
                                 {{"b", 1, false}, {"b", 2, false},
                                  {"b", 3, false}});
  CHECK(full.delivered_token_count() == 10);
  CHECK(cost_of(full) == 13);

  const auto cut = make_message("a", 1, words(10), 4, 2,
                                {{"b", 1, false}, {"b", 2, true}});
  CHECK(cut.delivered_token_count() == 8);
  CHECK(cut.undelivered_token_count() == 2);
  CHECK(cut.delivered_tokens() == words(8));
  CHECK(cost_of(cut) == 10);

  Transcript t;
  t.turns = {full, cut};
  t.terminal_round = 1;
  CHECK(cost_of(t) == 23);
  const auto by = cost_by_agent(t);
  CHECK(by.at("a") == 18);
  CHECK(by.at("b") == 5);
}

TEST_CASE("message validation") {
  CHECK_THROWS_AS(make_message("a", 0, words(4), 4), StructuralError);
  // truncation at the final chunk is not a truncation
  CHECK_THROWS_AS(make_message("a", 1, words(8), 4, 2), StructuralError);
  CHECK_THROWS_AS(make_message("a", 1, words(8), 4, 0), StructuralError);
  // a decision about a chunk that never arrived
  CHECK_THROWS_AS(make_message("a", 1, words(12), 4, 1, {{"b", 2, false}}),
                  StructuralError);
  CHECK_THROWS_AS(make_message("a", 1, words(4), 4, std::nullopt,
                               {{"a", 1, false}}),
                  StructuralError);
  CHECK_NOTHROW(make_message("a", 1, {}, 4));
}

TEST_CASE("rewards lie in the unit interval") {
  CHECK_NOTHROW(Reward(0.0));
  CHECK_NOTHROW(Reward(1.0));
  CHECK_THROWS_AS(Reward(1.5), StructuralError);
  CHECK_THROWS_AS(Reward(-0.1), StructuralError);
}

TEST_CASE("transcript validation") {
  Transcript t;
  t.turns = {make_message("a", 2, words(4), 4), make_message("b", 1, words(4), 4)};
  t.terminal_round = 1;
  CHECK_THROWS_AS(validate(t), StructuralError);
  t.turns = {make_message("a", 1, words(4), 4)};
  t.terminal_round = 3;
  CHECK_THROWS_AS(validate(t), StructuralError);
  t.terminal_round = 1;
  CHECK_NOTHROW(validate(t));
}

TEST_CASE("concat_prefix joins history, cut turn and continuation") {
  Transcript h;
  h.turns = {make_message("a", 1, words(4), 4)};
  h.terminal_round = 1;
  const auto cut = make_message("b", 1, words(8), 4, 1, {{"a", 1, true}});
  Transcript rest;
  rest.turns = {make_message("a", 1, words(2), 4), make_message("b", 2, words(3), 4)};
  rest.terminal_round = 2;
  rest.reward = Reward(1.0);
  const auto t = concat_prefix(h, cut, rest);
  CHECK(t.turns.size() == 4);
  CHECK(t.terminal_round == 2);
  CHECK(t.reward->value == 1.0);
  CHECK(cost_of(t) == cost_of(h) + cost_of(cut) + cost_of(rest));

  Transcript late;
  late.turns = {make_message("a", 2, words(2), 4)};
  late.terminal_round = 2;
  CHECK_THROWS_AS(concat_prefix(h, cut, late), StructuralError);
}

TEST_CASE("whitespace tokenizer round trip") {
  const auto& tok = default_tokenizer();
  const auto t = tok.tokenize("  a loud\tmorning\n device ");
  CHECK(t == TokenList{"a", "loud", "morning", "device"});
  CHECK(tok.detokenize(t) == "a loud morning device");
  CHECK(tok.tokenize("").empty());
}

TEST_CASE("jsonl round trip keeps every field") {
  Transcript t;
  t.turns = {make_message("a", 1, words(10), 4, 2,
                          {{"b", 1, false}, {"b", 2, true}}),
             make_message("b", 1, words(3, "r"), 4, std::nullopt,
                          {{"a", 1, false}})};
  t.terminal_round = 1;
  t.reward = Reward(1.0);
  const auto text = to_jsonl(t);
  CHECK(transcript_from_jsonl(text) == t);
  CHECK(text.find("\"truncated_at\":2") != std::string::npos);
  CHECK(text.find("\"reward\":1.0") != std::string::npos);

  std::stringstream two(text + text);
  const auto all = read_transcripts(two);
  REQUIRE(all.size() == 2);
  CHECK(all[1] == t);

  CHECK(render_history(t) == "a: w1 w2 w3 w4 w5 w6 w7 w8\nb: r1 r2 r3\n");
}

TEST_CASE("malformed jsonl is rejected") {
  CHECK_THROWS_AS(transcript_from_jsonl("{\"round\":1}\n"), StructuralError);
  CHECK_THROWS_AS(transcript_from_jsonl("not json\n"), StructuralError);
  CHECK_THROWS_AS(
      transcript_from_jsonl("{\"round\":1,\"author\":\"a\",\"tokens\":[\"x\"],"
                            "\"chunk_size\":4,\"truncated_at\":null,"
                            "\"decision_tokens\":[]}\n"),
      StructuralError);  // no footer
}
