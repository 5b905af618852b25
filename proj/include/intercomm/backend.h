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

// Message generation backends.
//
// A backend turns a speak request into text. Scripted backends wrap a
// deterministic function of the conversation so every oracle in the test
// suite is exact; the HTTP backend talks to any chat-completions server.

#ifndef INTERCOMM_BACKEND_H_
#define INTERCOMM_BACKEND_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <vector>

#include "intercomm/transcript.h"

namespace intercomm {

struct ChatMessage {
  std::string role;  // system, user or assistant
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatExchange {
  std::string system_prompt;
  std::vector<ChatMessage> messages;
  friend bool operator==(const ChatExchange&, const ChatExchange&) = default;
};

/// Rejects unknown roles and system messages after the conversation starts.
void validate(const ChatExchange& exchange);

/// Merges consecutive messages that share a role so user/assistant turns
/// alternate.
ChatExchange merge_consecutive_roles(ChatExchange exchange);

struct SpeakRequest {
  std::string agent;
  const Transcript* history = nullptr;  // null outside a conversation
  int round = 0;
  ChatExchange exchange;
};

class AgentBackend {
 public:
  virtual ~AgentBackend() = default;

  /// Raw text of the agent's next message.
  virtual std::string complete(const SpeakRequest& request) = 0;

  /// Probability that the first decision token is "Yes".
  virtual double score_affirmative(const ChatExchange& exchange) = 0;

  virtual const Tokenizer& tokenizer() const { return default_tokenizer(); }
};

/// complete() split by the backend's tokenizer. Empty content yields an
/// empty list.
TokenList generate_message(AgentBackend& backend, const SpeakRequest& request);

/// Deterministic stand-in for an LLM agent.
class ScriptedBackend final : public AgentBackend {
 public:
  using Script = std::function<std::string(const SpeakRequest&)>;

  /// `scores`, when non-empty, are returned in order by score_affirmative()
  /// and repeat cyclically. Without them the script's verdict text is
  /// mapped to 1.0 (Yes) or 0.0.
  explicit ScriptedBackend(Script script, std::vector<double> scores = {});

  std::string complete(const SpeakRequest& request) override;
  double score_affirmative(const ChatExchange& exchange) override;

 private:
  Script script_;
  std::vector<double> scores_;
  std::size_t next_score_ = 0;
};

enum class BackendKind { kScripted, kHttp };

struct BackendConfig {
  BackendKind kind = BackendKind::kScripted;
  std::optional<std::string> endpoint;  // full URL of the completions route
  std::optional<std::string> model;
  double temperature = 0.7;
  int max_tokens = 512;
  int timeout_ms = 30000;
  int retries = 2;
  int initial_backoff_ms = 250;
  int max_backoff_ms = 8000;
  std::string api_key_env = "OPENAI_API_KEY";
  bool request_logprobs = false;
  int top_logprobs = 5;
  int max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;
};

/// Throws ConfigError when an HTTP config lacks endpoint or model, or any
/// numeric field is out of range.
void validate(const BackendConfig& config);

/// Directory of digest-named response files. Concurrent readers are safe;
/// writers are serialized.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& request_body) const;
  void put(const std::string& request_body, const std::string& response_body);

  /// Lowercase hex SHA-256.
  static std::string digest(const std::string& body);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& request_body) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
};

struct HttpStats {
  std::int64_t requests = 0;  // attempts that reached the transport
  std::int64_t retries = 0;
  std::int64_t cache_hits = 0;
};

class HttpBackend final : public AgentBackend {
 public:
  using SleepFn = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(BackendConfig config, SleepFn sleep = {});

  std::string complete(const SpeakRequest& request) override;
  double score_affirmative(const ChatExchange& exchange) override;

  /// Request body; byte-identical for identical config and exchange.
  std::string request_body(const ChatExchange& exchange,
                           bool with_logprobs) const;

  HttpStats stats() const;
  const BackendConfig& config() const { return config_; }

 private:
  /// Posts `body` with retry and backoff; returns the response body.
  std::string post(const std::string& body);

  BackendConfig config_;
  SleepFn sleep_;
  std::unique_ptr<ResponseCache> cache_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<std::int64_t> next_correlation_id_{1};
  std::atomic<std::int64_t> requests_{0};
  std::atomic<std::int64_t> retries_{0};
  std::atomic<std::int64_t> cache_hits_{0};
};

std::unique_ptr<AgentBackend> make_http_backend(const BackendConfig& config);

/// Extracts choices[0].message.content from a chat-completions response.
/// Throws BackendError when the shape is wrong.
std::string parse_completion_content(const std::string& response_body);

/// Reads p("Yes") for the first generated token from the log-probability
/// extension. Returns nullopt when the response carries no log-probabilities.
std::optional<double> parse_affirmative_probability(
    const std::string& response_body);

}  // namespace intercomm

#endif  // INTERCOMM_BACKEND_H_
