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

// Experiment configuration, seeded runs and metric aggregation.
//
// Config files are key=value lines; '#' starts a comment.
//
//   task=pictionary
//   pattern=fixed:describer,guesser        # optional, task default otherwise
//   policy.guesser=oracle                  # generic|never|random|threshold:0.5|prompt|oracle
//   backend.guesser=scripted               # scripted|http
//   backend.guesser.endpoint=http://...    # any BackendConfig field
//   chunk_size=16
//   max_rounds=10
//   seeds=0,1,2                            # or a range: 0-2
//   instances=generate:0-49                # or file:path.jsonl
//   termination=either                     # either|task|rounds
//   concise=false
//   threads=1
//   task.clues_per_turn=0                  # forwarded to the task
//   tree.branches=3                        # sample-tree budget
//   tree.rollouts=10
//   tree.max_nodes=10
//   tree.temperature=1
//   tree.rollout=random                    # random|never

#ifndef INTERCOMM_HARNESS_H_
#define INTERCOMM_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "intercomm/backend.h"
#include "intercomm/instances_io.h"
#include "intercomm/payoff_tree.h"
#include "intercomm/protocol.h"

namespace intercomm {

struct PolicySpec {
  enum class Kind { kGeneric, kNever, kRandom, kThreshold, kPrompt, kOracle };
  Kind kind = Kind::kGeneric;
  double theta = 0.5;  // threshold only

  std::string to_string() const;
  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

PolicySpec parse_policy_spec(const std::string& text);

struct InstanceSource {
  enum class Kind { kGenerate, kFile };
  Kind kind = Kind::kGenerate;
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  std::filesystem::path path;

  std::string to_string() const;
};

struct ExperimentConfig {
  std::string task;
  std::optional<PatternSpec> pattern;
  std::map<std::string, PolicySpec> policies;
  std::map<std::string, BackendConfig> backends;
  int chunk_size = 16;
  int max_rounds = 10;
  std::vector<std::uint64_t> seeds{0};
  InstanceSource instances;
  Termination termination = Termination::kEither;
  bool concise = false;
  int threads = 1;
  TaskOptions task_options;
  SamplingBudget tree_budget;
  std::string tree_rollout = "random";
};

/// Parses and validates a config. Throws ConfigError with the offending
/// line on any unknown key or bad value.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& config);

/// Short hex digest of the canonical text, used as the output directory.
std::string config_digest(const ExperimentConfig& config);

std::vector<AnyInstance> load_instances(const ExperimentConfig& config);

/// Everything one conversation needs, with ownership of policies and
/// backends.
class ConversationKit {
 public:
  ConversationKit(const ExperimentConfig& config, const Environment& env,
                  std::uint64_t seed, std::uint64_t instance_index,
                  const std::map<std::string, AgentBackend*>& shared_backends);

  const std::vector<Participant>& participants() const { return participants_; }
  ConversationConfig conversation_config() const;
  PatternSpec pattern() const;
  std::map<std::string, AgentBackend*> backends() const;

 private:
  const ExperimentConfig& config_;
  const Environment& env_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<AgentBackend>> owned_backends_;
  std::vector<std::unique_ptr<InterruptionPolicy>> owned_policies_;
  std::vector<Participant> participants_;
};

/// Builds one shared HTTP backend per agent configured with kind=http.
std::map<std::string, std::unique_ptr<AgentBackend>> make_shared_backends(
    const ExperimentConfig& config);

struct InstanceResult {
  std::string instance_id;
  Transcript transcript;
  double reward = 0.0;
  std::int64_t cost = 0;
  int messages = 0;
  bool aborted = false;
  std::string error;
};

struct SeedMetrics {
  std::uint64_t seed = 0;
  double success_rate = 0.0;
  double cost = 0.0;      // mean per instance
  double messages = 0.0;  // mean per instance
  int instances = 0;
  int aborted = 0;
};

struct MetricsReport {
  double success_rate_mean = 0.0;
  double success_rate_std = 0.0;
  double cost_mean = 0.0;
  double cost_std = 0.0;
  double messages_per_conversation_mean = 0.0;
  std::vector<SeedMetrics> per_seed;
};

SeedMetrics seed_metrics(std::uint64_t seed,
                         const std::vector<InstanceResult>& results);

/// Mean and population standard deviation over seeds. Throws ConfigError
/// when empty.
MetricsReport aggregate_metrics(const std::vector<SeedMetrics>& per_seed);

ordered_json report_to_json(const MetricsReport& report);

struct ExperimentResult {
  MetricsReport report;
  std::map<std::uint64_t, std::vector<InstanceResult>> runs;
  std::filesystem::path output_dir;  // empty when nothing was written
};

/// Runs every instance under every seed. Backend failures mark the
/// instance as failed (reward 0, cost so far) and the run continues.
/// When `out_root` is given, writes <out_root>/<digest>/{config.txt,
/// transcripts_seed<S>.jsonl, metrics.json, results.csv}.
ExperimentResult run_experiment(
    const ExperimentConfig& config,
    const std::optional<std::filesystem::path>& out_root = std::nullopt);

/// Labels-ready trees for every (instance, seed) of the config.
std::vector<PayoffTree> sample_trees(const ExperimentConfig& config);

/// True iff chunk_size > sqrt(message_len): the decision tokens of a full
/// message are then repaid by saving one chunk.
bool breakeven_safe(std::int64_t message_len, std::int64_t chunk_size);

}  // namespace intercomm

#endif  // INTERCOMM_HARNESS_H_
