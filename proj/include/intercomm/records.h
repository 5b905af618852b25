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

// Instruction records exported from labeled payoff trees, plus a small
// JSON Schema checker used to validate them.

#ifndef INTERCOMM_RECORDS_H_
#define INTERCOMM_RECORDS_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "intercomm/json_fwd.h"
#include "intercomm/payoff_tree.h"
#include "intercomm/prompts.h"

namespace intercomm {

struct RecordMeta {
  std::string task;
  int round = 1;
  int chunk_index = 1;
  std::string node_id;
  double delta_cost = 0.0;
  double delta_perf = 0.0;
  friend bool operator==(const RecordMeta&, const RecordMeta&) = default;
};

struct InstructionRecord {
  std::string chat_history;
  std::string partial_message;
  std::string answer;  // "Yes" or "No"
  RecordMeta meta;
  friend bool operator==(const InstructionRecord&,
                         const InstructionRecord&) = default;
};

ordered_json record_to_json(const InstructionRecord& record);
InstructionRecord record_from_json(const ordered_json& j);

/// One record per interior branch of a labeled tree, in tree order. A
/// branch whose prompt cannot be rendered with `prompt` is skipped with a
/// warning.
std::vector<InstructionRecord> export_records(const PayoffTree& tree,
                                              const PromptTemplate& prompt);

/// The full interruption prompt a record stands for.
std::string render_instruction(const InstructionRecord& record,
                               const PromptTemplate& prompt);

void write_records_jsonl(std::ostream& out,
                         const std::vector<InstructionRecord>& records);
std::vector<InstructionRecord> read_records_jsonl(std::istream& in);

ordered_json load_schema(const std::filesystem::path& path);

/// Location of the instruction record schema shipped with the sources.
std::filesystem::path default_record_schema_path();

/// Checks `instance` against a JSON Schema restricted to type, enum,
/// required, properties, additionalProperties, minimum, maximum and
/// minLength. Returns one message per violation.
std::vector<std::string> schema_errors(const ordered_json& instance,
                                       const ordered_json& schema);

}  // namespace intercomm

#endif  // INTERCOMM_RECORDS_H_
