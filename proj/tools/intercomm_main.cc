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

// intercomm: command line front end.
//
// Exit codes: 0 success, 1 configuration or input error, 2 runtime abort.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "intercomm/error.h"
#include "intercomm/harness.h"
#include "intercomm/instances_io.h"
#include "intercomm/meeting.h"
#include "intercomm/payoff_tree.h"
#include "intercomm/records.h"

namespace {

using namespace intercomm;

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

TaskOptions parse_options(const std::vector<std::string>& kv) {
  TaskOptions out;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--opt expects key=value");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

int cmd_gen_tasks(const std::string& task, int count, std::uint64_t seed,
                  const std::string& out_path,
                  const std::vector<std::string>& opts) {
  if (count < 1) throw ConfigError("--count must be >= 1");
  const auto options = parse_options(opts);
  std::vector<AnyInstance> list;
  for (int i = 0; i < count; ++i) {
    list.push_back(gen_instance(task, seed + static_cast<std::uint64_t>(i),
                                options));
  }
  auto out = open_out(out_path);
  write_instances(out, list);
  std::cout << "wrote " << list.size() << " " << task << " instances to "
            << out_path << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const auto config = load_config(config_path);
  const auto result = run_experiment(config, std::filesystem::path(out_dir));
  const auto& r = result.report;
  std::cout << "output: " << result.output_dir.string() << "\n"
            << "success_rate: " << r.success_rate_mean << " +- "
            << r.success_rate_std << "\n"
            << "cost: " << r.cost_mean << " +- " << r.cost_std << "\n"
            << "messages: " << r.messages_per_conversation_mean << "\n";
  int aborted = 0, total = 0;
  for (const auto& s : r.per_seed) {
    aborted += s.aborted;
    total += s.instances;
  }
  std::cout << "aborted: " << aborted << "/" << total << "\n";
  if (total > 0 && aborted == total) {
    std::cerr << "runtime error: every conversation aborted\n";
    return kRuntimeError;
  }
  return 0;
}

int cmd_sample_tree(const std::string& config_path, int branches, int rollouts,
                    int max_nodes, const std::string& out_path) {
  auto config = load_config(config_path);
  if (branches > 0) config.tree_budget.max_branches = branches;
  if (rollouts > 0) config.tree_budget.rollouts_per_node = rollouts;
  if (max_nodes > 0) config.tree_budget.max_speaking_nodes = max_nodes;
  validate(config.tree_budget);
  const auto trees = sample_trees(config);
  auto out = open_out(out_path);
  std::size_t nodes = 0;
  for (const auto& t : trees) {
    write_tree_jsonl(out, t);
    nodes += t.nodes.size();
  }
  std::cout << "sampled " << trees.size() << " trees, " << nodes
            << " branch nodes -> " << out_path << "\n";
  return 0;
}

int cmd_label(const std::string& in_path, const std::string& out_path,
              const std::string& template_path, const std::string& schema) {
  std::ifstream in(in_path);
  if (!in) throw ConfigError("cannot open " + in_path);
  auto trees = read_trees_jsonl(in);
  const auto prompt = template_path.empty()
                          ? PromptTemplate::from_asset("interruption")
                          : PromptTemplate::from_file(template_path);
  const auto schema_json = load_schema(
      schema.empty() ? default_record_schema_path() : std::filesystem::path(schema));
  auto out = open_out(out_path);
  std::size_t yes = 0, total = 0;
  for (auto& t : trees) {
    label_tree(t);
    const auto records = export_records(t, prompt);
    for (const auto& r : records) {
      const auto j = record_to_json(r);
      const auto errors = schema_errors(j, schema_json);
      if (!errors.empty()) {
        throw StructuralError("record " + r.meta.node_id +
                              " violates the schema: " + errors.front());
      }
      out << j.dump() << '\n';
      yes += r.answer == "Yes";
      ++total;
    }
  }
  std::cout << "labeled " << trees.size() << " trees: " << total
            << " records (" << yes << " Yes) -> " << out_path << "\n";
  return 0;
}

int cmd_verify(const std::string& instances_path, const std::string& schedule_path,
               const std::string& id) {
  const auto list = read_instances(std::filesystem::path(instances_path));
  const MeetingInstance* inst = nullptr;
  for (const auto& a : list) {
    if (const auto* m = std::get_if<MeetingInstance>(&a)) {
      if (id.empty() || m->id == id) {
        inst = m;
        break;
      }
    }
  }
  if (!inst) throw ConfigError("no matching meeting instance in " + instances_path);
  std::ifstream in(schedule_path);
  if (!in) throw ConfigError("cannot open " + schedule_path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto text = ss.str();
  std::optional<Schedule> schedule;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    schedule = schedule_from_json(ordered_json::parse(text));
  } else {
    schedule = parse_schedule(text);
  }
  if (!schedule) {
    std::cout << "valid: false (no schedule found)\n";
    return 0;
  }
  const auto res = check_schedule(*inst, *schedule);
  std::cout << "valid: " << (res.ok ? "true" : "false");
  if (!res.ok) std::cout << " (" << res.reason << ")";
  std::cout << "\n";
  return 0;
}

int cmd_breakeven(std::int64_t len, std::int64_t chunk) {
  const bool safe = breakeven_safe(len, chunk);
  std::cout << "message_len: " << len << "\nchunk_size: " << chunk
            << "\nsqrt(message_len): " << std::sqrt(static_cast<double>(len))
            << "\nsafe: " << (safe ? "true" : "false") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interruptible multi-agent communication toolkit"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  auto* gen = app.add_subcommand("gen-tasks", "Generate task instances");
  std::string task, out_path;
  int count = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> opts;
  gen->add_option("--task", task, "pictionary|meeting|debate|relay")->required();
  gen->add_option("--count", count, "Number of instances");
  gen->add_option("--seed", seed, "First instance seed");
  gen->add_option("--out", out_path, "Output JSONL")->required();
  gen->add_option("--opt", opts, "Task option key=value (repeatable)");

  auto* run = app.add_subcommand("run", "Run an experiment");
  std::string config_path, out_dir = "out";
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", out_dir, "Output root directory");

  auto* tree = app.add_subcommand("sample-tree", "Sample payoff trees");
  int branches = 0, rollouts = 0, max_nodes = 0;
  std::string tree_out;
  tree->add_option("--config", config_path, "Config file")->required();
  tree->add_option("--branches", branches, "Max branches per speaking node");
  tree->add_option("--rollouts", rollouts, "Rollouts per branch");
  tree->add_option("--max-nodes", max_nodes, "Max speaking nodes per case");
  tree->add_option("--out", tree_out, "Tree JSONL")->required();

  auto* label = app.add_subcommand("label", "Label trees and export records");
  std::string label_in, label_out, template_path, schema_path;
  label->add_option("--in", label_in, "Tree JSONL")->required();
  label->add_option("--out", label_out, "Records JSONL")->required();
  label->add_option("--template", template_path, "Interruption prompt file");
  label->add_option("--schema", schema_path, "Record JSON schema");

  auto* verify = app.add_subcommand("verify", "Check a meeting schedule");
  std::string instances_path, schedule_path, instance_id_opt;
  verify->add_option("--instances", instances_path, "Instance JSONL")->required();
  verify->add_option("--schedule", schedule_path, "Schedule text or JSON")
      ->required();
  verify->add_option("--id", instance_id_opt, "Instance id (default: first)");

  auto* be = app.add_subcommand("breakeven", "Break-even chunk size check");
  std::int64_t message_len = 0, chunk_size = 0;
  be->add_option("--message-len", message_len, "Message length L")->required();
  be->add_option("--chunk-size", chunk_size, "Chunk size")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*gen) return cmd_gen_tasks(task, count, seed, out_path, opts);
    if (*run) return cmd_run(config_path, out_dir);
    if (*tree) {
      return cmd_sample_tree(config_path, branches, rollouts, max_nodes,
                             tree_out);
    }
    if (*label) return cmd_label(label_in, label_out, template_path, schema_path);
    if (*verify) return cmd_verify(instances_path, schedule_path, instance_id_opt);
    if (*be) return cmd_breakeven(message_len, chunk_size);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const StructuralError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
