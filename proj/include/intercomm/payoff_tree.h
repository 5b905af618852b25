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

// Tree-sampled payoff estimation.
//
// A speaking node is a turn heard by the environment's interruptor. Each
// candidate interruption point i of that turn becomes a branch; the
// conversation is forked after the cut and rolled out to the end. Branch
// ids compose along the path: "2" is the root turn cut after chunk 2,
// "2.4" the next speaking node on that branch cut after chunk 4.

#ifndef INTERCOMM_PAYOFF_TREE_H_
#define INTERCOMM_PAYOFF_TREE_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "intercomm/json_fwd.h"
#include "intercomm/protocol.h"

namespace intercomm {

struct SamplingBudget {
  int max_branches = 3;        // B, including the full-delivery branch
  int rollouts_per_node = 10;  // N
  int max_rounds = 10;
  int max_speaking_nodes = 10;  // M
  double temperature = 1.0;
};

void validate(const SamplingBudget& budget);

enum class Label { kNegative, kPositive };

struct PayoffEstimate {
  double delta_cost = 0.0;
  double delta_perf = 0.0;
  Label label = Label::kNegative;
  friend bool operator==(const PayoffEstimate&, const PayoffEstimate&) = default;
};

Label label_for(double delta_cost, double delta_perf);

struct TreeNode {
  std::string case_id;  // seed case the tree was sampled for
  std::string node_id;
  std::string parent_id;  // speaking node: "root" or the branch it hangs off
  std::string task;
  int round = 1;
  std::string speaker;
  std::string listener;
  Transcript history;  // everything before the speaking turn
  std::vector<Chunk> partial_chunks;
  int branch_index = 1;
  int chunk_count = 1;  // n of the speaking turn
  std::int64_t prefix_tokens = 0;
  std::int64_t full_tokens = 0;
  std::optional<double> est_cost;  // mean tokens after the branched turn
  std::optional<double> est_perf;
  int rollout_count = 0;
  bool terminal = false;  // the branched turn itself ended the conversation
  std::optional<PayoffEstimate> estimate;

  bool is_baseline() const { return branch_index == chunk_count; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct PayoffTree {
  std::string case_id;
  std::string task;
  std::vector<TreeNode> nodes;

  const TreeNode* find(const std::string& node_id) const;
  /// Branches of one speaking node, in branch order.
  std::vector<const TreeNode*> branches_of(const std::string& parent_id) const;
  std::vector<const TreeNode*> interior() const;
};

/// Returns the interruption policy `agent` uses during rollouts, or null for
/// a listener without interruption rights.
using PolicyFactory = std::function<std::unique_ptr<InterruptionPolicy>(
    const std::string& agent, std::uint64_t seed)>;

PolicyFactory random_rollouts(std::string listener);
PolicyFactory never_rollouts(std::string listener);

struct TreeSetup {
  const Environment* env = nullptr;
  ConversationConfig config;
  PatternSpec pattern;
  std::map<std::string, AgentBackend*> backends;  // not owned
  bool concise = false;
  PolicyFactory rollout_policy;
  ConversationState start;  // seed conversation; empty by default
  std::string case_id;
};

/// Samples the tree for one seed case. Deterministic in `seed` given
/// deterministic backends.
PayoffTree sample_tree(const TreeSetup& setup, const SamplingBudget& budget,
                       std::uint64_t seed);

/// Branch i against the full-delivery branch of the same speaking node.
PayoffEstimate delta_of(const TreeNode& branch, const TreeNode& baseline);

/// Attaches an estimate to every branch. Throws EstimateError when a
/// speaking node lacks its full-delivery branch or a branch has no
/// estimates.
void label_tree(PayoffTree& tree);

ordered_json node_to_json(const TreeNode& node);
TreeNode node_from_json(const ordered_json& j);
void write_tree_jsonl(std::ostream& out, const PayoffTree& tree);
/// Splits the stream into one tree per case id, in order of appearance.
std::vector<PayoffTree> read_trees_jsonl(std::istream& in);

}  // namespace intercomm

#endif  // INTERCOMM_PAYOFF_TREE_H_
