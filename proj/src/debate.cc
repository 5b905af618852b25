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

#include "intercomm/debate.h"

#include <algorithm>
#include <cctype>

#include "intercomm/error.h"
#include "intercomm/prompts.h"
#include "intercomm/rng.h"
#include "wordlists.h"

namespace intercomm {

namespace {

constexpr std::string_view kTemplates[] = {
    "Textbook treatments of {topic} list {ans} as the standard answer.",
    "Measurements from controlled experiments on {topic} agree with {ans}.",
    "Experts who study {topic} overwhelmingly favor {ans}.",
    "Historical records about {topic} are consistent with {ans}.",
    "A simple thought experiment about {topic} leads directly to {ans}.",
    "Alternative explanations of {topic} fail exactly where {ans} succeeds.",
};

constexpr std::string_view kDebaterFiller =
    "Let me add some context before the moderator weighs in. Careful "
    "reasoning about this question keeps pointing the same way, and I look "
    "forward to hearing the other side respond to these points in detail.";

std::string fill(std::string_view tmpl, const std::string& topic,
                 const std::string& ans) {
  return PromptTemplate(std::string(tmpl)).render({{"topic", topic}, {"ans", ans}});
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Word following `key` after skipping quotes, colons and spaces.
std::optional<std::string> value_after(const std::string& text,
                                       std::string_view key) {
  const auto at = text.find(key);
  if (at == std::string::npos) return std::nullopt;
  std::size_t i = at + key.size();
  while (i < text.size() &&
         (text[i] == '"' || text[i] == ':' || text[i] == '\'' ||
          std::isspace(static_cast<unsigned char>(text[i])))) {
    ++i;
  }
  std::size_t j = i;
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) {
    ++j;
  }
  return text.substr(i, j - i);
}

}  // namespace

void validate(const DebateInstance& inst) {
  if (inst.correct_answer == inst.incorrect_answer) {
    throw StructuralError("debate answers must differ");
  }
  const auto& correct =
      inst.pro_holds_correct ? inst.evidence_pro : inst.evidence_con;
  if (inst.decisive_statement < 0 ||
      inst.decisive_statement >= static_cast<int>(correct.size())) {
    throw StructuralError("decisive statement out of range");
  }
}

DebateInstance gen_debate_instance(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "debate"));
  DebateInstance inst;
  inst.id = "debate-" + std::to_string(seed);
  const std::string topic(words::kDebateTopics[uniform_int(
      rng, 0, words::kDebateTopics.size() - 1)]);
  inst.question = "Which option correctly identifies " + topic +
                  "? Options: (A), (B), (C), (D).";
  std::string letters = "ABCD";
  std::shuffle(letters.begin(), letters.end(), rng);
  inst.correct_answer = letters[0];
  inst.incorrect_answer = letters[1];
  inst.pro_holds_correct = uniform_int(rng, 0, 1) == 1;

  std::vector<int> order(std::size(kTemplates));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::shuffle(order.begin(), order.end(), rng);
  const std::string pro = std::string("(") + inst.pro_answer() + ")";
  const std::string con = std::string("(") + inst.con_answer() + ")";
  for (int k = 0; k < 3; ++k) {
    inst.evidence_pro.push_back(fill(kTemplates[order[k]], topic, pro));
    inst.evidence_con.push_back(fill(kTemplates[order[k + 3]], topic, con));
  }
  inst.decisive_statement = uniform_int(rng, 0, 2);
  validate(inst);
  return inst;
}

std::optional<Verdict> parse_verdict_block(std::string_view text) {
  const std::string t = lower(text);
  const auto side = value_after(t, "supported side");
  if (!side) return std::nullopt;
  Verdict v;
  if (*side == "pro") {
    v.side = Side::kPro;
  } else if (*side == "con") {
    v.side = Side::kCon;
  }
  const auto pref = value_after(t, "whether there is a preference");
  v.preference = pref ? *pref == "yes" : v.side.has_value();
  return v;
}

std::string format_verdict(std::optional<Side> side, const std::string& answer) {
  std::string out = "```{\"Whether there is a preference\": \"";
  out += side ? "Yes" : "No";
  out += "\", \"Supported Side\": \"";
  if (side) out += *side == Side::kPro ? "pro" : "con";
  out += "\", \"Reason\": \"";
  out += side ? "The decisive evidence supports this side."
              : "More evidence is needed.";
  out += "\", \"debate-answer\": \"" + answer + "\"}```";
  return out;
}

DebateEnv::DebateEnv(DebateInstance instance, bool always_wait)
    : instance_(std::move(instance)), always_wait_(always_wait) {
  validate(instance_);
}

std::vector<AgentId> DebateEnv::agents() const {
  return {{kPro, AgentRole::kBoth},
          {kCon, AgentRole::kBoth},
          {kModerator, AgentRole::kBoth}};
}

PatternSpec DebateEnv::default_pattern() const {
  return PatternSpec::GroupChat({kPro, kCon, kModerator});
}

const std::string& DebateEnv::correct_side() const {
  static const std::string pro = kPro, con = kCon;
  return instance_.pro_holds_correct ? pro : con;
}

TokenList DebateEnv::stance(const std::string& side) const {
  const char ans = side == kPro ? instance_.pro_answer() : instance_.con_answer();
  return default_tokenizer().tokenize(std::string("I support (") + ans + ").");
}

std::vector<TokenList> DebateEnv::statements(const std::string& side) const {
  const auto& src = side == kPro ? instance_.evidence_pro : instance_.evidence_con;
  std::vector<TokenList> out;
  for (const auto& s : src) out.push_back(default_tokenizer().tokenize(s));
  return out;
}

int DebateEnv::statements_delivered(const std::string& side,
                                    const Transcript& history) const {
  const auto st = statements(side);
  const auto head = stance(side).size();
  int k = 0;
  for (const auto& m : history.turns) {
    if (m.author != side || k >= static_cast<int>(st.size())) continue;
    const auto d = m.delivered_tokens();
    const auto& s = st[k];
    if (d.size() >= head + s.size() &&
        std::equal(s.begin(), s.end(), d.begin() + head)) {
      ++k;
    }
  }
  return k;
}

bool DebateEnv::decisive_heard(const Transcript& history) const {
  return statements_delivered(correct_side(), history) >
         instance_.decisive_statement;
}

StepResult DebateEnv::step(const Transcript& t) const {
  if (t.turns.empty()) return StepResult::Continue();
  const auto& last = t.turns.back();
  if (last.author != kModerator) return StepResult::Continue();
  const auto v = parse_verdict_block(join_tokens(last.delivered_tokens()));
  if (!v || !v->preference || !v->side) return StepResult::Continue();
  const bool pro_wins = *v->side == Side::kPro;
  return StepResult::Terminal(pro_wins == instance_.pro_holds_correct ? 1.0
                                                                      : 0.0);
}

ChatExchange DebateEnv::build_exchange(const std::string& agent,
                                       const Transcript& history,
                                       bool concise) const {
  std::string system;
  if (agent == kModerator) {
    system = PromptTemplate::from_asset("moderator").render(
        {{"question", instance_.question}});
  } else if (agent == kPro || agent == kCon) {
    const char ans =
        agent == kPro ? instance_.pro_answer() : instance_.con_answer();
    system = PromptTemplate::from_asset("debater").render(
        {{"side", agent == kPro ? "PRO" : "CON"},
         {"question", instance_.question},
         {"answer", std::string("(") + ans + ")"}});
  } else {
    throw ConfigError("debate has no agent " + agent);
  }
  if (concise) system = concise_instruction() + "\n" + system;
  return history_exchange(agent, system, history);
}

std::string DebateEnv::scripted_message(const std::string& agent,
                                        const Transcript& history) const {
  if (agent == kModerator) {
    if (!always_wait_ && decisive_heard(history)) {
      const bool pro = instance_.pro_holds_correct;
      return format_verdict(pro ? Side::kPro : Side::kCon,
                            std::string("(") + instance_.correct_answer + ")");
    }
    return format_verdict(std::nullopt, "");
  }
  if (agent != kPro && agent != kCon) {
    throw ConfigError("debate has no agent " + agent);
  }
  TokenList out = stance(agent);
  const auto st = statements(agent);
  const int k = statements_delivered(agent, history);
  const auto body = k < static_cast<int>(st.size())
                        ? st[k]
                        : default_tokenizer().tokenize("I stand by my answer.");
  out.insert(out.end(), body.begin(), body.end());
  const auto filler = default_tokenizer().tokenize(kDebaterFiller);
  out.insert(out.end(), filler.begin(), filler.end());
  return join_tokens(out);
}

bool DebateEnv::key_delivered(const PolicyContext& ctx) const {
  if (ctx.listener != kModerator) return false;
  if (decisive_heard(ctx.history)) return true;
  if (ctx.speaker != correct_side()) return false;
  const std::string side(ctx.speaker);
  if (statements_delivered(side, ctx.history) != instance_.decisive_statement) {
    return false;
  }
  const auto need = stance(side).size() +
                    statements(side)[instance_.decisive_statement].size();
  return flatten(ctx.current_chunks).size() >= need;
}

}  // namespace intercomm
