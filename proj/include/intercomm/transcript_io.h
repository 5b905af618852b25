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

// JSON-lines transcript format.
//
// One object per turn, keys in this order:
//
//   {"round":1,"author":"describer","tokens":["a","loud",...],
//    "chunk_size":16,"truncated_at":null,
//    "decision_tokens":[{"agent":"guesser","chunk":1,"text":"No"},...]}
//
// `tokens` is the full generated message; the delivered prefix is the first
// `truncated_at` chunks of `chunk_size` tokens (all of them when null).
// A transcript ends with one footer line:
//
//   {"terminal_round":2,"reward":1.0}
//
// with "reward" null when the conversation carries none. Several
// transcripts may be concatenated in one file; each footer closes one.

#ifndef INTERCOMM_TRANSCRIPT_IO_H_
#define INTERCOMM_TRANSCRIPT_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "intercomm/json_fwd.h"
#include "intercomm/transcript.h"

namespace intercomm {

ordered_json message_to_json(const Message& message);
Message message_from_json(const ordered_json& j);

std::string to_jsonl(const Transcript& transcript);
void write_jsonl(std::ostream& out, const Transcript& transcript);

/// Parses exactly one transcript. Throws StructuralError on malformed input.
Transcript transcript_from_jsonl(const std::string& text);

/// Parses every transcript in a concatenated stream.
std::vector<Transcript> read_transcripts(std::istream& in);

/// Plain-text rendering, one "author: text" line per delivered turn.
std::string render_history(const Transcript& transcript);

}  // namespace intercomm

#endif  // INTERCOMM_TRANSCRIPT_IO_H_
