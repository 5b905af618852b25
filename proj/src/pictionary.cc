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

#include "intercomm/pictionary.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "intercomm/error.h"
#include "intercomm/prompts.h"
#include "intercomm/rng.h"
#include "wordlists.h"

namespace intercomm {

int PictionaryInstance::description_length() const {
  int n = 0;
  for (const auto& a : attributes) n += static_cast<int>(a.size());
  return n;
}

TokenList PictionaryInstance::description() const {
  TokenList out;
  for (const auto& a : attributes) out.insert(out.end(), a.begin(), a.end());
  return out;
}

std::string normalize_token(std::string_view token) {
  std::size_t b = 0, e = token.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(token[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
  std::string out(token.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

namespace {

TokenList normalized(const TokenList& tokens) {
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(normalize_token(t));
  return out;
}

bool contains_sequence(const TokenList& hay, const TokenList& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) !=
         hay.end();
}

TokenList flat(const std::vector<TokenList>& attrs) {
  TokenList out;
  for (const auto& a : attrs) out.insert(out.end(), a.begin(), a.end());
  return out;
}

}  // namespace

int brute_force_identifying_prefix(const PictionaryInstance& inst) {
  const TokenList secret = inst.description();
  std::vector<TokenList> others;
  for (const auto& d : inst.distractors) others.push_back(flat(d.attributes));
  for (std::size_t k = 0; k <= secret.size(); ++k) {
    bool unique = true;
    for (const auto& o : others) {
      if (std::equal(secret.begin(), secret.begin() + k, o.begin())) {
        unique = false;
        break;
      }
    }
    if (unique) return static_cast<int>(k);
  }
  return -1;
}

void validate(const PictionaryInstance& inst) {
  if (inst.entity.empty()) throw StructuralError("pictionary without entity");
  if (inst.attributes.empty()) {
    throw StructuralError("pictionary without attributes");
  }
  std::vector<TokenList> forbidden;
  for (const auto& f : inst.forbidden_surface_forms) {
    forbidden.push_back(normalized(default_tokenizer().tokenize(f)));
  }
  for (const auto& a : inst.attributes) {
    if (a.empty()) throw StructuralError("empty pictionary attribute");
    const auto na = normalized(a);
    for (const auto& f : forbidden) {
      if (contains_sequence(na, f)) {
        throw StructuralError("attribute leaks a forbidden form");
      }
    }
  }
  for (const auto& d : inst.distractors) {
    if (d.attributes.size() != inst.attributes.size()) {
      throw StructuralError("distractor layout differs from the secret");
    }
    for (std::size_t j = 0; j < d.attributes.size(); ++j) {
      if (d.attributes[j].size() != inst.attributes[j].size()) {
        throw StructuralError("distractor layout differs from the secret");
      }
    }
  }
  if (brute_force_identifying_prefix(inst) != inst.identifying_prefix) {
    throw StructuralError("identifying prefix does not match the candidates");
  }
}

PictionaryInstance gen_pictionary_instance(std::uint64_t seed,
                                           const PictionaryGenOptions& opt) {
  if (opt.description_tokens < opt.attribute_count || opt.attribute_count < 1 ||
      opt.distractors < 1 || !(opt.min_fraction > 0.0) ||
      opt.max_fraction < opt.min_fraction || opt.max_fraction > 1.0) {
    throw ConfigError("invalid pictionary generator options");
  }
  Rng rng(derive_seed(seed, "pictionary"));
  PictionaryInstance inst;
  inst.id = "pictionary-" + std::to_string(seed);
  const auto& ents = words::kEntities;
  const auto& clue = words::kClueWords;
  const int secret_idx = uniform_int(rng, 0, ents.size() - 1);
  inst.entity = std::string(ents[secret_idx]);
  inst.forbidden_surface_forms = {inst.entity, inst.entity + "s",
                                  inst.entity + "es"};

  const int L = opt.description_tokens;
  const int K = opt.attribute_count;
  std::vector<int> lengths(K, L / K);
  for (int j = 0; j < L % K; ++j) ++lengths[j];

  auto word = [&] {
    return std::string(clue[uniform_int(rng, 0, clue.size() - 1)]);
  };
  TokenList secret(L);
  for (auto& t : secret) t = word();

  const double f =
      std::uniform_real_distribution<double>(opt.min_fraction,
                                             opt.max_fraction)(rng);
  const int p = std::clamp(static_cast<int>(std::lround(f * L)), 1, L);
  inst.identifying_prefix = p;

  auto split = [&](const TokenList& tokens) {
    std::vector<TokenList> out;
    std::size_t at = 0;
    for (int len : lengths) {
      out.emplace_back(tokens.begin() + at, tokens.begin() + at + len);
      at += len;
    }
    return out;
  };
  inst.attributes = split(secret);

  std::vector<int> names;
  for (int i = 0; i < static_cast<int>(ents.size()); ++i) {
    if (i != secret_idx) names.push_back(i);
  }
  std::shuffle(names.begin(), names.end(), rng);
  const int nd = std::min<int>(opt.distractors, names.size());
  for (int d = 0; d < nd; ++d) {
    const int q = d == 0 || p == 1 ? p - 1 : uniform_int(rng, 0, p - 2);
    TokenList tokens(secret.begin(), secret.begin() + q);
    std::string diverge;
    do {
      diverge = word();
    } while (diverge == secret[q]);
    tokens.push_back(diverge);
    while (static_cast<int>(tokens.size()) < L) tokens.push_back(word());
    inst.distractors.push_back({std::string(ents[names[d]]), split(tokens)});
  }
  validate(inst);
  return inst;
}

PictionaryEnv::PictionaryEnv(PictionaryInstance instance, int clues_per_turn)
    : instance_(std::move(instance)), clues_per_turn_(clues_per_turn) {
  if (clues_per_turn_ < 0) throw ConfigError("clues_per_turn must be >= 0");
  validate(instance_);
}

std::vector<AgentId> PictionaryEnv::agents() const {
  return {{kDescriber, AgentRole::kBoth}, {kGuesser, AgentRole::kBoth}};
}

PatternSpec PictionaryEnv::default_pattern() const {
  return PatternSpec::FixedOrder({kDescriber, kGuesser});
}

std::pair<int, int> PictionaryEnv::next_span(
    const std::vector<int>& evidence) const {
  const int K = static_cast<int>(instance_.attributes.size());
  int j0 = 0;
  while (j0 < K &&
         evidence[j0] >= static_cast<int>(instance_.attributes[j0].size())) {
    ++j0;
  }
  if (j0 == K) j0 = 0;  // everything delivered: start over
  const int count = clues_per_turn_ == 0 ? K - j0
                                         : std::min(clues_per_turn_, K - j0);
  return {j0, count};
}

void PictionaryEnv::apply(std::vector<int>& evidence,
                          const TokenList& delivered) const {
  const auto [j0, count] = next_span(evidence);
  std::size_t at = 0;
  for (int j = j0; j < j0 + count && at < delivered.size(); ++j) {
    const auto& attr = instance_.attributes[j];
    int match = 0;
    while (match < static_cast<int>(attr.size()) && at < delivered.size() &&
           delivered[at] == attr[match]) {
      ++match;
      ++at;
    }
    evidence[j] = std::max(evidence[j], match);
    if (match < static_cast<int>(attr.size())) break;
  }
}

std::vector<int> PictionaryEnv::evidence(const Transcript& history,
                                         const TokenList* in_flight) const {
  std::vector<int> ev(instance_.attributes.size(), 0);
  for (const auto& m : history.turns) {
    if (m.author == kDescriber) apply(ev, m.delivered_tokens());
  }
  if (in_flight) apply(ev, *in_flight);
  return ev;
}

std::vector<std::string> PictionaryEnv::consistent(
    const std::vector<int>& ev) const {
  std::vector<std::string> out{instance_.entity};
  for (const auto& d : instance_.distractors) {
    bool ok = true;
    for (std::size_t j = 0; j < ev.size() && ok; ++j) {
      ok = std::equal(instance_.attributes[j].begin(),
                      instance_.attributes[j].begin() + ev[j],
                      d.attributes[j].begin());
    }
    if (ok) out.push_back(d.name);
  }
  return out;
}

bool PictionaryEnv::leaks(const TokenList& tokens) const {
  const auto nt = normalized(tokens);
  for (const auto& f : instance_.forbidden_surface_forms) {
    if (contains_sequence(nt, normalized(default_tokenizer().tokenize(f)))) {
      return true;
    }
  }
  return false;
}

bool PictionaryEnv::names_entity(const TokenList& tokens) const {
  return contains_sequence(
      normalized(tokens),
      normalized(default_tokenizer().tokenize(instance_.entity)));
}

StepResult PictionaryEnv::step(const Transcript& t) const {
  if (t.turns.empty()) return StepResult::Continue();
  const auto& last = t.turns.back();
  const auto delivered = last.delivered_tokens();
  if (last.author == kDescriber && leaks(delivered)) {
    return StepResult::Terminal(0.0);
  }
  if (last.author == kGuesser && names_entity(delivered)) {
    return StepResult::Terminal(1.0);
  }
  return StepResult::Continue();
}

ChatExchange PictionaryEnv::build_exchange(const std::string& agent,
                                           const Transcript& history,
                                           bool concise) const {
  std::string system;
  if (agent == kDescriber) {
    system = PromptTemplate::from_asset("describer").render(
        {{"entity", instance_.entity}});
  } else if (agent == kGuesser) {
    system = std::string(prompt_asset("guesser"));
  } else {
    throw ConfigError("pictionary has no agent " + agent);
  }
  if (concise) system = concise_instruction() + "\n" + system;
  return history_exchange(agent, system, history);
}

std::string PictionaryEnv::scripted_message(const std::string& agent,
                                            const Transcript& history) const {
  if (agent == kDescriber) {
    const auto [j0, count] = next_span(evidence(history));
    TokenList out;
    for (int j = j0; j < j0 + count; ++j) {
      const auto& a = instance_.attributes[j];
      out.insert(out.end(), a.begin(), a.end());
    }
    return join_tokens(out);
  }
  if (agent == kGuesser) {
    const auto left = consistent(evidence(history));
    if (left.size() == 1) return "my guess is " + left.front();
    return "please give me another clue";
  }
  throw ConfigError("pictionary has no agent " + agent);
}

bool PictionaryEnv::key_delivered(const PolicyContext& ctx) const {
  if (ctx.listener != kGuesser || ctx.speaker != kDescriber) return false;
  const TokenList prefix = flatten(ctx.current_chunks);
  return consistent(evidence(ctx.history, &prefix)).size() == 1;
}

}  // namespace intercomm
