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

#include "intercomm/environment.h"

#include "intercomm/prompts.h"

namespace intercomm {

double Environment::scripted_score(const PolicyContext& context) const {
  const double progress =
      static_cast<double>(context.chunk_index) / context.total_chunks;
  if (key_delivered(context)) return 0.6 + 0.2 * progress * 0.99;
  return 0.1 + 0.3 * progress * 0.99;
}

std::unique_ptr<AgentBackend> make_scripted_backend(const Environment& env,
                                                    const std::string& agent) {
  return std::make_unique<ScriptedBackend>(
      [&env, agent](const SpeakRequest& req) {
        static const Transcript kEmpty;
        return env.scripted_message(agent, req.history ? *req.history : kEmpty);
      });
}

std::string concise_instruction() {
  return std::string(prompt_asset("concise"));
}

ChatExchange history_exchange(const std::string& agent,
                              const std::string& system_prompt,
                              const Transcript& history) {
  ChatExchange ex;
  ex.system_prompt = system_prompt;
  for (const auto& m : history.turns) {
    const auto text = join_tokens(m.delivered_tokens());
    if (m.author == agent) {
      ex.messages.push_back({"assistant", text});
    } else {
      ex.messages.push_back({"user", m.author + ": " + text});
    }
  }
  if (ex.messages.empty() || ex.messages.back().role == "assistant") {
    ex.messages.push_back({"user", "Begin."});
  }
  return merge_consecutive_roles(std::move(ex));
}

}  // namespace intercomm
