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

#include "intercomm/transcript.h"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "intercomm/error.h"

namespace intercomm {

std::int64_t Message::full_token_count() const {
  std::int64_t n = 0;
  for (const auto& c : chunks) n += static_cast<std::int64_t>(c.size());
  return n;
}

std::int64_t Message::delivered_token_count() const {
  std::int64_t n = 0;
  const int delivered = delivered_chunk_count();
  for (int k = 0; k < delivered; ++k) {
    n += static_cast<std::int64_t>(chunks[k].size());
  }
  return n;
}

TokenList Message::delivered_tokens() const {
  return flatten(std::span<const Chunk>(chunks).first(
      static_cast<std::size_t>(delivered_chunk_count())));
}

TokenList Message::all_tokens() const { return flatten(chunks); }

Reward::Reward(double v) : value(v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw StructuralError("reward must lie in [0, 1], got " +
                          std::to_string(v));
  }
}

std::vector<Chunk> chunk_message(const TokenList& tokens, int chunk_size) {
  if (chunk_size < 1) {
    throw StructuralError("chunk_size must be >= 1");
  }
  std::vector<Chunk> chunks;
  const auto size = static_cast<std::size_t>(chunk_size);
  for (std::size_t begin = 0; begin < tokens.size(); begin += size) {
    const std::size_t end = std::min(tokens.size(), begin + size);
    Chunk c;
    c.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                    tokens.begin() + static_cast<std::ptrdiff_t>(end));
    c.index = static_cast<int>(chunks.size()) + 1;
    chunks.push_back(std::move(c));
  }
  if (!chunks.empty()) chunks.back().is_final = true;
  return chunks;
}

TokenList flatten(std::span<const Chunk> chunks) {
  TokenList out;
  for (const auto& c : chunks) {
    out.insert(out.end(), c.tokens.begin(), c.tokens.end());
  }
  return out;
}

Message make_message(std::string author, int round, const TokenList& tokens,
                     int chunk_size, std::optional<int> truncated_at,
                     std::vector<DecisionToken> decisions) {
  Message m;
  m.author = std::move(author);
  m.round = round;
  m.chunk_size = chunk_size;
  m.chunks = chunk_message(tokens, chunk_size);
  m.truncated_at = truncated_at;
  m.decisions = std::move(decisions);
  validate(m);
  return m;
}

std::int64_t cost_of(const Message& message) {
  return message.delivered_token_count() +
         static_cast<std::int64_t>(message.decisions.size());
}

std::int64_t cost_of(std::span<const Message> turns) {
  std::int64_t total = 0;
  for (const auto& m : turns) total += cost_of(m);
  return total;
}

std::int64_t cost_of(const Transcript& transcript) {
  return cost_of(std::span<const Message>(transcript.turns));
}

std::map<std::string, std::int64_t> cost_by_agent(
    const Transcript& transcript) {
  std::map<std::string, std::int64_t> out;
  for (const auto& m : transcript.turns) {
    out[m.author] += m.delivered_token_count();
    for (const auto& d : m.decisions) out[d.agent] += 1;
  }
  return out;
}

void validate(const Message& m) {
  if (m.round < 1) throw StructuralError("message round must be >= 1");
  if (m.chunk_size < 1) throw StructuralError("chunk_size must be >= 1");
  const int n = m.chunk_count();
  for (int k = 0; k < n; ++k) {
    const auto& c = m.chunks[k];
    if (c.index != k + 1) {
      throw StructuralError("chunk indices must be contiguous from 1");
    }
    if (c.is_final != (k + 1 == n)) {
      throw StructuralError("only the last chunk may be marked final");
    }
    if (k + 1 < n && static_cast<int>(c.size()) != m.chunk_size) {
      throw StructuralError("non-final chunk must have chunk_size tokens");
    }
    if (c.size() == 0 || static_cast<int>(c.size()) > m.chunk_size) {
      throw StructuralError("chunk size out of range");
    }
  }
  if (m.truncated_at && (*m.truncated_at < 1 || *m.truncated_at >= n)) {
    throw StructuralError("truncated_at must satisfy 1 <= i < chunk count");
  }
  for (const auto& d : m.decisions) {
    if (d.chunk < 1 || d.chunk > m.delivered_chunk_count()) {
      throw StructuralError("decision token answers an undelivered chunk");
    }
    if (d.agent == m.author) {
      throw StructuralError("a speaker cannot decide on its own message");
    }
  }
}

void validate(const Transcript& t) {
  int last_round = 0;
  for (const auto& m : t.turns) {
    validate(m);
    if (m.round < last_round) {
      throw StructuralError("transcript rounds must be non-decreasing");
    }
    last_round = m.round;
  }
  if (!t.turns.empty() && t.terminal_round != last_round) {
    throw StructuralError("terminal_round must equal the last turn's round");
  }
}

Transcript concat_prefix(const Transcript& history, const Message& truncated,
                         const Transcript& continuation) {
  if (!history.turns.empty() && history.turns.back().round > truncated.round) {
    throw StructuralError("history extends past the truncated turn's round");
  }
  if (!continuation.turns.empty() &&
      continuation.turns.front().round != truncated.round) {
    throw StructuralError(
        "continuation must start in the truncated turn's round");
  }
  Transcript out;
  out.turns.reserve(history.turns.size() + 1 + continuation.turns.size());
  out.turns = history.turns;
  out.turns.push_back(truncated);
  out.turns.insert(out.turns.end(), continuation.turns.begin(),
                   continuation.turns.end());
  out.terminal_round = out.turns.back().round;
  out.reward = continuation.turns.empty() ? history.reward : continuation.reward;
  validate(out);
  return out;
}

TokenList WhitespaceTokenizer::tokenize(std::string_view text) const {
  TokenList out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    const std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string WhitespaceTokenizer::detokenize(
    std::span<const std::string> tokens) const {
  return join_tokens(tokens);
}

const Tokenizer& default_tokenizer() {
  static const WhitespaceTokenizer kTokenizer;
  return kTokenizer;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace intercomm
