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

#include "intercomm/records.h"

#include <fstream>
#include <istream>
#include <ostream>

#include <spdlog/spdlog.h>

#include "intercomm/policy.h"
#include "intercomm/transcript_io.h"

#ifndef INTERCOMM_SCHEMA_DIR
#define INTERCOMM_SCHEMA_DIR "schemas"
#endif

namespace intercomm {

namespace {

std::string chat_history_text(const Transcript& history) {
  std::string h = render_history(history);
  if (!h.empty() && h.back() == '\n') h.pop_back();
  return h;
}

bool type_matches(const ordered_json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

void check(const ordered_json& v, const ordered_json& s,
           const std::string& path, std::vector<std::string>& errors) {
  const auto where = path.empty() ? std::string("$") : path;
  if (s.contains("type")) {
    const auto& t = s["type"];
    bool ok = false;
    if (t.is_array()) {
      for (const auto& x : t) ok = ok || type_matches(v, x.get<std::string>());
    } else {
      ok = type_matches(v, t.get<std::string>());
    }
    if (!ok) {
      errors.push_back(where + ": expected type " + t.dump());
      return;
    }
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) errors.push_back(where + ": value not in enum");
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>()) {
      errors.push_back(where + ": below minimum");
    }
    if (s.contains("maximum") && x > s["maximum"].get<double>()) {
      errors.push_back(where + ": above maximum");
    }
  }
  if (v.is_string() && s.contains("minLength") &&
      v.get<std::string>().size() < s["minLength"].get<std::size_t>()) {
    errors.push_back(where + ": shorter than minLength");
  }
  if (!v.is_object()) return;
  if (s.contains("required")) {
    for (const auto& k : s["required"]) {
      if (!v.contains(k.get<std::string>())) {
        errors.push_back(where + ": missing " + k.get<std::string>());
      }
    }
  }
  const ordered_json* props =
      s.contains("properties") ? &s["properties"] : nullptr;
  for (const auto& [k, child] : v.items()) {
    if (props && props->contains(k)) {
      check(child, (*props)[k], where + "." + k, errors);
    } else if (s.contains("additionalProperties") &&
               s["additionalProperties"] == false) {
      errors.push_back(where + ": unexpected key " + k);
    }
  }
}

}  // namespace

ordered_json record_to_json(const InstructionRecord& r) {
  ordered_json meta;
  meta["task"] = r.meta.task;
  meta["round"] = r.meta.round;
  meta["chunk_index"] = r.meta.chunk_index;
  meta["node_id"] = r.meta.node_id;
  meta["delta_cost"] = r.meta.delta_cost;
  meta["delta_perf"] = r.meta.delta_perf;
  ordered_json j;
  j["chat_history"] = r.chat_history;
  j["partial_message"] = r.partial_message;
  j["answer"] = r.answer;
  j["meta"] = std::move(meta);
  return j;
}

InstructionRecord record_from_json(const ordered_json& j) {
  try {
    InstructionRecord r;
    r.chat_history = j.at("chat_history").get<std::string>();
    r.partial_message = j.at("partial_message").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    const auto& m = j.at("meta");
    r.meta.task = m.at("task").get<std::string>();
    r.meta.round = m.at("round").get<int>();
    r.meta.chunk_index = m.at("chunk_index").get<int>();
    r.meta.node_id = m.at("node_id").get<std::string>();
    r.meta.delta_cost = m.at("delta_cost").get<double>();
    r.meta.delta_perf = m.at("delta_perf").get<double>();
    if (r.answer != "Yes" && r.answer != "No") {
      throw StructuralError("record answer must be Yes or No");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("bad instruction record: ") + e.what());
  }
}

std::vector<InstructionRecord> export_records(const PayoffTree& tree,
                                              const PromptTemplate& prompt) {
  std::vector<InstructionRecord> out;
  for (const TreeNode* n : tree.interior()) {
    if (!n->estimate) {
      throw EstimateError("unlabeled node " + n->node_id);
    }
    InstructionRecord r;
    r.chat_history = chat_history_text(n->history);
    r.partial_message = n->speaker + ": " + render_chunks(n->partial_chunks);
    r.answer = n->estimate->label == Label::kPositive ? "Yes" : "No";
    r.meta = {n->task.empty() ? tree.task : n->task,
              n->round,
              n->branch_index,
              n->node_id,
              n->estimate->delta_cost,
              n->estimate->delta_perf};
    try {
      render_instruction(r, prompt);
    } catch (const std::exception& e) {
      spdlog::warn("skipping record {}: {}", n->node_id, e.what());
      continue;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string render_instruction(const InstructionRecord& r,
                               const PromptTemplate& prompt) {
  return prompt.render({{std::string(kHistorySlot), r.chat_history},
                        {std::string(kChunksSlot), r.partial_message}});
}

void write_records_jsonl(std::ostream& out,
                         const std::vector<InstructionRecord>& records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<InstructionRecord> read_records_jsonl(std::istream& in) {
  std::vector<InstructionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw StructuralError(std::string("bad record line: ") + e.what());
    }
  }
  return out;
}

ordered_json load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("bad schema " + path.string() + ": " + e.what());
  }
}

std::filesystem::path default_record_schema_path() {
  return std::filesystem::path(INTERCOMM_SCHEMA_DIR) /
         "instruction_record.schema.json";
}

std::vector<std::string> schema_errors(const ordered_json& instance,
                                       const ordered_json& schema) {
  std::vector<std::string> errors;
  check(instance, schema, "", errors);
  return errors;
}

}  // namespace intercomm
