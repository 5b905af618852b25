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

// Tokens, chunks, messages and transcripts, plus the communication-cost
// accounting every other module relies on.
//
// Cost of a transcript is the number of content tokens actually delivered
// (a halted speaker's undelivered suffix is free) plus one token for every
// Yes/No interruption decision a listener emitted.

#ifndef INTERCOMM_TRANSCRIPT_H_
#define INTERCOMM_TRANSCRIPT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace intercomm {

using TokenList = std::vector<std::string>;

enum class AgentRole { kSpeaker, kListener, kBoth };

struct AgentId {
  std::string name;
  AgentRole role = AgentRole::kBoth;

  bool can_speak() const { return role != AgentRole::kListener; }
  bool can_listen() const { return role != AgentRole::kSpeaker; }
  friend bool operator==(const AgentId&, const AgentId&) = default;
};

enum class TokenOrigin { kContent, kDecision };

struct Token {
  std::string text;
  TokenOrigin origin = TokenOrigin::kContent;

  static Token Decision(bool interrupt) {
    return Token{interrupt ? "Yes" : "No", TokenOrigin::kDecision};
  }
};

struct Chunk {
  TokenList tokens;
  int index = 1;  // 1-based position within the message
  bool is_final = false;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// One Yes/No verdict, attributed to the listener and stamped with the chunk
/// it answers.
struct DecisionToken {
  std::string agent;
  int chunk = 1;
  bool interrupt = false;

  Token token() const { return Token::Decision(interrupt); }
  friend bool operator==(const DecisionToken&, const DecisionToken&) = default;
};

struct Message {
  std::string author;
  int round = 1;
  int chunk_size = 1;
  std::vector<Chunk> chunks;       // the full generated message
  std::optional<int> truncated_at; // absent: delivered in full
  std::vector<DecisionToken> decisions;

  int chunk_count() const { return static_cast<int>(chunks.size()); }
  int delivered_chunk_count() const {
    return truncated_at.value_or(chunk_count());
  }
  std::int64_t full_token_count() const;
  std::int64_t delivered_token_count() const;
  /// Tokens the speaker never emitted because it was halted.
  std::int64_t undelivered_token_count() const {
    return full_token_count() - delivered_token_count();
  }
  TokenList delivered_tokens() const;
  TokenList all_tokens() const;

  friend bool operator==(const Message&, const Message&) = default;
};

struct Reward {
  double value = 0.0;

  Reward() = default;
  explicit Reward(double v);
  friend bool operator==(const Reward&, const Reward&) = default;
};

struct Transcript {
  std::vector<Message> turns;
  int terminal_round = 0;
  std::optional<Reward> reward;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Splits `tokens` into chunks of `chunk_size`; only the last may be short.
/// An empty token list yields no chunks.
std::vector<Chunk> chunk_message(const TokenList& tokens, int chunk_size);

/// Concatenates the chunk tokens back into one list.
TokenList flatten(std::span<const Chunk> chunks);

/// Builds a message from a token list. Throws StructuralError when
/// `truncated_at` violates 1 <= truncated_at < chunk count.
Message make_message(std::string author, int round, const TokenList& tokens,
                     int chunk_size,
                     std::optional<int> truncated_at = std::nullopt,
                     std::vector<DecisionToken> decisions = {});

std::int64_t cost_of(const Message& message);
std::int64_t cost_of(const Transcript& transcript);
std::int64_t cost_of(std::span<const Message> turns);

/// Cost split by the agent who generated each token; decision tokens are
/// charged to the deciding listener.
std::map<std::string, std::int64_t> cost_by_agent(const Transcript& transcript);

/// Throws StructuralError unless every message is internally consistent and
/// rounds never decrease.
void validate(const Transcript& transcript);
void validate(const Message& message);

/// C^{1:t-1} || truncated turn || continuation. The continuation, when
/// non-empty, must start in the truncated turn's round.
Transcript concat_prefix(const Transcript& history, const Message& truncated,
                         const Transcript& continuation);

/// Turns a text into tokens and back. The default splits on whitespace; HTTP
/// backends may install a model tokenizer.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual TokenList tokenize(std::string_view text) const = 0;
  virtual std::string detokenize(std::span<const std::string> tokens) const = 0;
};

class WhitespaceTokenizer final : public Tokenizer {
 public:
  TokenList tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const std::string> tokens) const override;
};

const Tokenizer& default_tokenizer();

std::string join_tokens(std::span<const std::string> tokens);

}  // namespace intercomm

#endif  // INTERCOMM_TRANSCRIPT_H_
