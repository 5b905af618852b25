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

#include "intercomm/payoff_tree.h"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

#include <spdlog/spdlog.h>

#include "intercomm/rng.h"
#include "intercomm/transcript_io.h"

namespace intercomm {

namespace {

constexpr const char* kRoot = "root";

// A turn waiting to be branched, together with the state right after its
// slot was popped.
struct SpeakingNode {
  std::string id;
  ConversationState state;
  PendingTurn turn;
};

// Owns the per-run policies and builds a Conversation over them.
class Fork {
 public:
  Fork(const TreeSetup& setup, int max_rounds, std::uint64_t seed)
      : setup_(setup) {
    config_ = setup.config;
    config_.max_rounds = max_rounds;
    const std::string key = setup.env->interruptor();
    for (const auto& a : setup.env->agents()) {
      auto p = setup.rollout_policy ? setup.rollout_policy(a.name, seed)
                                    : nullptr;
      if (!p && a.name == key) p = std::make_unique<NeverInterrupt>();
      Participant part;
      part.id = a;
      const auto it = setup.backends.find(a.name);
      part.backend = it == setup.backends.end() ? nullptr : it->second;
      part.policy = p.get();
      part.concise = setup.concise;
      if (p) owned_.push_back(std::move(p));
      participants_.push_back(part);
    }
  }

  Conversation open(ConversationState state) const {
    return Conversation(config_, setup_.pattern, participants_, *setup_.env,
                        std::move(state));
  }

 private:
  const TreeSetup& setup_;
  ConversationConfig config_;
  std::vector<std::unique_ptr<InterruptionPolicy>> owned_;
  std::vector<Participant> participants_;
};

// Plays forward from `state` until the interruptor hears a non-empty turn.
std::optional<SpeakingNode> walk_to_speaking(const TreeSetup& setup,
                                             int max_rounds,
                                             const std::string& id,
                                             ConversationState state,
                                             std::uint64_t seed) {
  if (state.finished) return std::nullopt;
  Fork fork(setup, max_rounds, derive_seed(seed, id + "/walk"));
  auto conv = fork.open(std::move(state));
  const std::string key = setup.env->interruptor();
  try {
    while (!conv.finished()) {
      auto turn = conv.next_turn();
      if (!turn) return std::nullopt;
      if (turn->chunk_count() > 0 && conv.listens_with_policy(*turn, key)) {
        return SpeakingNode{id, conv.state(), std::move(*turn)};
      }
      conv.commit(*turn, conv.stream(*turn));
    }
  } catch (const ConversationAborted& e) {
    spdlog::warn("tree walk from {} aborted: {}", id, e.what());
  }
  return std::nullopt;
}

std::vector<int> choose_branches(int n, int max_branches, Rng& rng) {
  std::vector<int> out;
  if (n <= max_branches) {
    out.resize(n);
    std::iota(out.begin(), out.end(), 1);
    return out;
  }
  std::vector<int> interior(n - 1);
  std::iota(interior.begin(), interior.end(), 1);
  std::shuffle(interior.begin(), interior.end(), rng);
  out.assign(interior.begin(), interior.begin() + (max_branches - 1));
  std::sort(out.begin(), out.end());
  out.push_back(n);
  return out;
}

std::string branch_id(const std::string& parent, int i) {
  return parent == kRoot ? std::to_string(i)
                         : parent + "." + std::to_string(i);
}

}  // namespace

void validate(const SamplingBudget& b) {
  if (b.max_branches < 2) throw ConfigError("max_branches must be >= 2");
  if (b.rollouts_per_node < 1) throw ConfigError("rollouts must be >= 1");
  if (b.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (b.max_speaking_nodes < 1) throw ConfigError("max_nodes must be >= 1");
  if (b.temperature < 0.0) throw ConfigError("temperature must be >= 0");
}

Label label_for(double delta_cost, double delta_perf) {
  return delta_cost < 0.0 && delta_perf >= 0.0 ? Label::kPositive
                                               : Label::kNegative;
}

const TreeNode* PayoffTree::find(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.node_id == id) return &n;
  }
  return nullptr;
}

std::vector<const TreeNode*> PayoffTree::branches_of(
    const std::string& parent_id) const {
  std::vector<const TreeNode*> out;
  for (const auto& n : nodes) {
    if (n.parent_id == parent_id) out.push_back(&n);
  }
  std::sort(out.begin(), out.end(), [](const TreeNode* a, const TreeNode* b) {
    return a->branch_index < b->branch_index;
  });
  return out;
}

std::vector<const TreeNode*> PayoffTree::interior() const {
  std::vector<const TreeNode*> out;
  for (const auto& n : nodes) {
    if (!n.is_baseline()) out.push_back(&n);
  }
  return out;
}

PolicyFactory random_rollouts(std::string listener) {
  return [listener = std::move(listener)](const std::string& agent,
                                          std::uint64_t seed)
             -> std::unique_ptr<InterruptionPolicy> {
    if (agent != listener) return nullptr;
    return std::make_unique<RandomInterrupt>(seed);
  };
}

PolicyFactory never_rollouts(std::string listener) {
  return [listener = std::move(listener)](const std::string& agent,
                                          std::uint64_t)
             -> std::unique_ptr<InterruptionPolicy> {
    if (agent != listener) return nullptr;
    return std::make_unique<NeverInterrupt>();
  };
}

PayoffTree sample_tree(const TreeSetup& setup, const SamplingBudget& budget,
                       std::uint64_t seed) {
  validate(budget);
  if (!setup.env) throw ConfigError("tree setup without environment");
  const auto& env = *setup.env;
  const std::string key = env.interruptor();
  PayoffTree tree;
  tree.task = env.task_name();
  tree.case_id = setup.case_id;

  std::vector<SpeakingNode> frontier;
  if (auto root = walk_to_speaking(setup, budget.max_rounds, kRoot,
                                   setup.start, seed)) {
    frontier.push_back(std::move(*root));
  }
  int expanded = 0;
  for (int level = 0; !frontier.empty() && expanded < budget.max_speaking_nodes;
       ++level) {
    const auto room =
        static_cast<std::size_t>(budget.max_speaking_nodes - expanded);
    if (frontier.size() > room) {
      std::vector<std::size_t> idx(frontier.size());
      std::iota(idx.begin(), idx.end(), 0);
      Rng rng(derive_seed(seed, "select", level));
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(room);
      std::sort(idx.begin(), idx.end());
      std::vector<SpeakingNode> kept;
      for (auto i : idx) kept.push_back(std::move(frontier[i]));
      frontier = std::move(kept);
    }
    std::vector<SpeakingNode> next;
    for (const auto& sp : frontier) {
      ++expanded;
      const int n = sp.turn.chunk_count();
      Rng brng(derive_seed(seed, sp.id + "/branches"));
      Fork base(setup, budget.max_rounds, seed);
      const auto conv = base.open(sp.state);
      for (int i : choose_branches(n, budget.max_branches, brng)) {
        TreeNode node;
        node.case_id = tree.case_id;
        node.node_id = branch_id(sp.id, i);
        node.parent_id = sp.id;
        node.task = tree.task;
        node.round = sp.turn.round;
        node.speaker = sp.turn.slot.group.speaker();
        node.listener = key;
        node.history = sp.state.transcript;
        node.partial_chunks.assign(sp.turn.chunks.begin(),
                                   sp.turn.chunks.begin() + i);
        node.branch_index = i;
        node.chunk_count = n;
        node.full_tokens = static_cast<std::int64_t>(sp.turn.tokens.size());

        const auto outcome = conv.force(sp.turn, key, i);
        node.prefix_tokens = outcome.message.delivered_token_count();
        auto after = base.open(sp.state);
        after.commit(sp.turn, outcome);
        const ConversationState branch_state = after.state();
        const auto before = cost_of(branch_state.transcript);

        if (branch_state.finished) {
          node.terminal = true;
          node.est_cost = 0.0;
          node.est_perf = branch_state.transcript.reward.value_or(Reward{}).value;
          node.rollout_count = 1;
          tree.nodes.push_back(std::move(node));
          continue;
        }
        double cost = 0.0, perf = 0.0;
        for (int r = 0; r < budget.rollouts_per_node; ++r) {
          Fork fork(setup, budget.max_rounds,
                    derive_seed(seed, node.node_id, r));
          auto roll = fork.open(branch_state);
          Transcript t;
          double reward = 0.0;
          try {
            t = roll.run();
            reward = t.reward.value_or(Reward{}).value;
          } catch (const ConversationAborted& e) {
            spdlog::warn("rollout {}#{} aborted: {}", node.node_id, r,
                         e.what());
            t = e.partial();
          }
          cost += static_cast<double>(cost_of(t) - before);
          perf += reward;
        }
        node.rollout_count = budget.rollouts_per_node;
        node.est_cost = cost / budget.rollouts_per_node;
        node.est_perf = perf / budget.rollouts_per_node;
        if (auto child = walk_to_speaking(setup, budget.max_rounds,
                                          node.node_id, branch_state, seed)) {
          next.push_back(std::move(*child));
        }
        tree.nodes.push_back(std::move(node));
      }
    }
    frontier = std::move(next);
  }
  return tree;
}

PayoffEstimate delta_of(const TreeNode& branch, const TreeNode& baseline) {
  if (!branch.est_cost || !branch.est_perf || !baseline.est_cost ||
      !baseline.est_perf) {
    throw EstimateError("node without estimates: " +
                        (branch.est_cost ? baseline.node_id : branch.node_id));
  }
  if (branch.parent_id != baseline.parent_id || !baseline.is_baseline()) {
    throw EstimateError("baseline " + baseline.node_id +
                        " is not the full-delivery sibling of " +
                        branch.node_id);
  }
  PayoffEstimate e;
  e.delta_cost =
      (static_cast<double>(branch.prefix_tokens) + *branch.est_cost) -
      (static_cast<double>(baseline.full_tokens) + *baseline.est_cost);
  e.delta_perf = *branch.est_perf - *baseline.est_perf;
  e.label = label_for(e.delta_cost, e.delta_perf);
  return e;
}

void label_tree(PayoffTree& tree) {
  std::map<std::string, const TreeNode*> baselines;
  for (const auto& n : tree.nodes) {
    if (n.is_baseline()) baselines[n.parent_id] = &n;
  }
  std::vector<PayoffEstimate> est;
  est.reserve(tree.nodes.size());
  for (const auto& n : tree.nodes) {
    const auto it = baselines.find(n.parent_id);
    if (it == baselines.end()) {
      throw EstimateError("speaking node " + n.parent_id +
                          " has no full-delivery branch");
    }
    est.push_back(delta_of(n, *it->second));
  }
  for (std::size_t k = 0; k < est.size(); ++k) tree.nodes[k].estimate = est[k];
}

ordered_json node_to_json(const TreeNode& n) {
  ordered_json j;
  j["case"] = n.case_id;
  j["node_id"] = n.node_id;
  j["parent_id"] = n.parent_id;
  j["task"] = n.task;
  j["round"] = n.round;
  j["speaker"] = n.speaker;
  j["listener"] = n.listener;
  ordered_json hist = ordered_json::array();
  for (const auto& m : n.history.turns) hist.push_back(message_to_json(m));
  j["history"] = std::move(hist);
  ordered_json chunks = ordered_json::array();
  for (const auto& c : n.partial_chunks) chunks.push_back(c.tokens);
  j["partial_chunks"] = std::move(chunks);
  j["branch_index"] = n.branch_index;
  j["chunk_count"] = n.chunk_count;
  j["prefix_tokens"] = n.prefix_tokens;
  j["full_tokens"] = n.full_tokens;
  j["est_cost"] = n.est_cost ? ordered_json(*n.est_cost) : ordered_json();
  j["est_perf"] = n.est_perf ? ordered_json(*n.est_perf) : ordered_json();
  j["rollout_count"] = n.rollout_count;
  j["terminal"] = n.terminal;
  if (n.estimate) {
    j["estimate"] = {
        {"delta_cost", n.estimate->delta_cost},
        {"delta_perf", n.estimate->delta_perf},
        {"label",
         n.estimate->label == Label::kPositive ? "positive" : "negative"}};
  }
  return j;
}

TreeNode node_from_json(const ordered_json& j) {
  try {
    TreeNode n;
    n.case_id = j.value("case", std::string());
    n.node_id = j.at("node_id").get<std::string>();
    n.parent_id = j.at("parent_id").get<std::string>();
    n.task = j.at("task").get<std::string>();
    n.round = j.at("round").get<int>();
    n.speaker = j.at("speaker").get<std::string>();
    n.listener = j.at("listener").get<std::string>();
    for (const auto& m : j.at("history")) {
      n.history.turns.push_back(message_from_json(m));
    }
    if (!n.history.turns.empty()) {
      n.history.terminal_round = n.history.turns.back().round;
    }
    n.chunk_count = j.at("chunk_count").get<int>();
    const auto& chunks = j.at("partial_chunks");
    for (std::size_t k = 0; k < chunks.size(); ++k) {
      Chunk c;
      c.tokens = chunks[k].get<TokenList>();
      c.index = static_cast<int>(k) + 1;
      c.is_final = c.index == n.chunk_count;
      n.partial_chunks.push_back(std::move(c));
    }
    n.branch_index = j.at("branch_index").get<int>();
    n.prefix_tokens = j.at("prefix_tokens").get<std::int64_t>();
    n.full_tokens = j.at("full_tokens").get<std::int64_t>();
    if (!j.at("est_cost").is_null()) n.est_cost = j["est_cost"].get<double>();
    if (!j.at("est_perf").is_null()) n.est_perf = j["est_perf"].get<double>();
    n.rollout_count = j.at("rollout_count").get<int>();
    n.terminal = j.at("terminal").get<bool>();
    if (j.contains("estimate")) {
      const auto& e = j["estimate"];
      n.estimate = PayoffEstimate{
          e.at("delta_cost").get<double>(), e.at("delta_perf").get<double>(),
          e.at("label").get<std::string>() == "positive" ? Label::kPositive
                                                         : Label::kNegative};
    }
    if (n.branch_index < 1 || n.branch_index > n.chunk_count ||
        static_cast<int>(n.partial_chunks.size()) != n.branch_index) {
      throw StructuralError("inconsistent branch " + n.node_id);
    }
    if ((n.est_cost || n.est_perf) && n.rollout_count < 1) {
      throw StructuralError("estimates without rollouts at " + n.node_id);
    }
    return n;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("bad tree node: ") + e.what());
  }
}

void write_tree_jsonl(std::ostream& out, const PayoffTree& tree) {
  for (const auto& n : tree.nodes) out << node_to_json(n).dump() << '\n';
}

std::vector<PayoffTree> read_trees_jsonl(std::istream& in) {
  std::vector<PayoffTree> trees;
  std::map<std::string, std::size_t> index;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw StructuralError(std::string("bad tree line: ") + e.what());
    }
    auto node = node_from_json(j);
    const auto [it, fresh] = index.emplace(node.case_id, trees.size());
    if (fresh) {
      trees.emplace_back();
      trees.back().case_id = node.case_id;
      trees.back().task = node.task;
    }
    trees[it->second].nodes.push_back(std::move(node));
  }
  return trees;
}

}  // namespace intercomm
