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

#include "intercomm/policy.h"

#include <cctype>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "intercomm/error.h"
#include "intercomm/transcript_io.h"

namespace intercomm {

void validate(const InterruptionDecision& decision) {
  if (decision.score &&
      !(*decision.score >= 0.0 && *decision.score <= 1.0)) {
    throw StructuralError("decision score outside [0, 1]");
  }
}

int random_plan(int n_chunks, Rng& rng) {
  if (n_chunks < 1) throw StructuralError("random_plan needs n >= 1");
  return uniform_int(rng, 1, n_chunks);
}

void RandomInterrupt::begin_turn(int total_chunks) {
  plan_ = random_plan(total_chunks, rng_);
}

InterruptionDecision RandomInterrupt::decide(const PolicyContext& context) {
  return {plan_ < context.total_chunks && context.chunk_index == plan_,
          std::nullopt};
}

ThresholdRule::ThresholdRule(double theta) : theta(theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ConfigError("threshold must lie in [0, 1]");
  }
}

bool threshold_decide(double p_y, const ThresholdRule& rule) {
  return p_y >= rule.theta;
}

std::string render_chunks(std::span<const Chunk> chunks) {
  return join_tokens(flatten(chunks));
}

ChatExchange interruption_exchange(const PromptTemplate& prompt,
                                   const PolicyContext& context,
                                   const std::string& system_prompt) {
  std::string history = render_history(context.history);
  if (!history.empty() && history.back() == '\n') history.pop_back();
  std::string current(context.speaker);
  current += ": ";
  current += render_chunks(context.current_chunks);
  ChatExchange ex;
  ex.system_prompt = system_prompt;
  ex.messages.push_back(
      {"user", prompt.render({{std::string(kHistorySlot), history},
                              {std::string(kChunksSlot), current}})});
  return ex;
}

BackendScoreSource::BackendScoreSource(AgentBackend& backend,
                                       PromptTemplate prompt,
                                       std::string system_prompt)
    : backend_(backend),
      prompt_(std::move(prompt)),
      system_prompt_(std::move(system_prompt)) {}

double BackendScoreSource::score(const PolicyContext& context) {
  return backend_.score_affirmative(
      interruption_exchange(prompt_, context, system_prompt_));
}

ThresholdPolicy::ThresholdPolicy(std::shared_ptr<ScoreSource> source,
                                 ThresholdRule rule)
    : source_(std::move(source)), rule_(rule) {
  if (!source_) throw ConfigError("threshold policy needs a score source");
}

std::string ThresholdPolicy::name() const {
  std::ostringstream os;
  os << "threshold:" << rule_.theta;
  return os.str();
}

InterruptionDecision ThresholdPolicy::decide(const PolicyContext& context) {
  const double p = source_->score(context);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw BackendError("score outside [0, 1]");
  }
  return {threshold_decide(p, rule_), p};
}

std::optional<bool> parse_verdict(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() &&
         (std::isspace(static_cast<unsigned char>(text[i])) ||
          text[i] == '"' || text[i] == '\'' || text[i] == '`' ||
          text[i] == '*')) {
    ++i;
  }
  auto starts = [&](std::string_view word) {
    if (text.size() - i < word.size()) return false;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(text[i + k])) != word[k]) {
        return false;
      }
    }
    const std::size_t end = i + word.size();
    return end == text.size() ||
           !std::isalnum(static_cast<unsigned char>(text[end]));
  };
  if (starts("yes")) return true;
  if (starts("no")) return false;
  return std::nullopt;
}

PromptPolicy::PromptPolicy(AgentBackend& backend, PromptTemplate prompt,
                           std::string system_prompt)
    : backend_(backend),
      prompt_(std::move(prompt)),
      system_prompt_(std::move(system_prompt)) {}

InterruptionDecision PromptPolicy::decide(const PolicyContext& context) {
  SpeakRequest req;
  req.agent = std::string(context.listener);
  req.history = &context.history;
  req.round = context.round;
  req.exchange = interruption_exchange(prompt_, context, system_prompt_);
  const std::string text = backend_.complete(req);
  if (const auto verdict = parse_verdict(text)) {
    return {*verdict, std::nullopt};
  }
  ++parse_failures_;
  spdlog::warn("listener {}: unparseable interruption verdict \"{}\", using No",
               context.listener, text.substr(0, 40));
  return fallback();
}

ChoiceSequencePolicy::ChoiceSequencePolicy(
    std::vector<int> choices, std::unique_ptr<InterruptionPolicy> then)
    : choices_(std::move(choices)), then_(std::move(then)) {
  for (int c : choices_) {
    if (c < 1) throw ConfigError("interruption choices must be >= 1");
  }
}

void ChoiceSequencePolicy::begin_turn(int total_chunks) {
  const auto k = static_cast<std::size_t>(turns_heard_++);
  if (k < choices_.size()) {
    plan_ = choices_[k];
  } else {
    plan_.reset();
    if (then_) then_->begin_turn(total_chunks);
  }
}

InterruptionDecision ChoiceSequencePolicy::decide(const PolicyContext& context) {
  if (plan_) {
    return {*plan_ < context.total_chunks && context.chunk_index == *plan_,
            std::nullopt};
  }
  if (then_) return then_->decide(context);
  return {};
}

}  // namespace intercomm
