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

#include "intercomm/harness.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "intercomm/error.h"
#include "intercomm/prompts.h"
#include "intercomm/rng.h"
#include "intercomm/transcript_io.h"

namespace intercomm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& key,
                                                    const std::string& v) {
  const auto dash = v.find('-');
  if (dash == std::string::npos) {
    const auto x = parse_int<std::uint64_t>(key, v);
    return {x, x};
  }
  const auto a = parse_int<std::uint64_t>(key, v.substr(0, dash));
  const auto b = parse_int<std::uint64_t>(key, v.substr(dash + 1));
  if (b < a) throw ConfigError(key + ": empty range " + v);
  if (b - a > 1000000) throw ConfigError(key + ": range too large");
  return {a, b};
}

std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto [a, b] = parse_range("seeds", part);
    for (auto s = a; s <= b; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError("seeds: at least one seed is required");
  return out;
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kEither: return "either";
    case Termination::kTaskSignal: return "task";
    case Termination::kMaxRounds: return "rounds";
  }
  return "either";
}

void set_backend_field(BackendConfig& b, const std::string& key,
                       const std::string& field, const std::string& v) {
  if (field == "endpoint") {
    b.endpoint = v;
  } else if (field == "model") {
    b.model = v;
  } else if (field == "temperature") {
    b.temperature = parse_real(key, v);
  } else if (field == "max_tokens") {
    b.max_tokens = parse_int<int>(key, v);
  } else if (field == "timeout_ms") {
    b.timeout_ms = parse_int<int>(key, v);
  } else if (field == "retries") {
    b.retries = parse_int<int>(key, v);
  } else if (field == "initial_backoff_ms") {
    b.initial_backoff_ms = parse_int<int>(key, v);
  } else if (field == "max_backoff_ms") {
    b.max_backoff_ms = parse_int<int>(key, v);
  } else if (field == "api_key_env") {
    b.api_key_env = v;
  } else if (field == "logprobs") {
    b.request_logprobs = parse_bool(key, v);
  } else if (field == "top_logprobs") {
    b.top_logprobs = parse_int<int>(key, v);
  } else if (field == "max_in_flight") {
    b.max_in_flight = parse_int<int>(key, v);
  } else if (field == "cache_dir") {
    b.cache_dir = v;
  } else {
    throw ConfigError("unknown key " + key);
  }
}

void backend_lines(std::ostream& os, const std::string& agent,
                   const BackendConfig& b) {
  const std::string p = "backend." + agent;
  os << p << '=' << (b.kind == BackendKind::kHttp ? "http" : "scripted")
     << '\n';
  if (b.kind != BackendKind::kHttp) return;
  if (b.endpoint) os << p << ".endpoint=" << *b.endpoint << '\n';
  if (b.model) os << p << ".model=" << *b.model << '\n';
  os << p << ".temperature=" << fmt::format("{}", b.temperature) << '\n';
  os << p << ".max_tokens=" << b.max_tokens << '\n';
  os << p << ".timeout_ms=" << b.timeout_ms << '\n';
  os << p << ".retries=" << b.retries << '\n';
  os << p << ".initial_backoff_ms=" << b.initial_backoff_ms << '\n';
  os << p << ".max_backoff_ms=" << b.max_backoff_ms << '\n';
  os << p << ".api_key_env=" << b.api_key_env << '\n';
  os << p << ".logprobs=" << (b.request_logprobs ? "true" : "false") << '\n';
  os << p << ".top_logprobs=" << b.top_logprobs << '\n';
  os << p << ".max_in_flight=" << b.max_in_flight << '\n';
  if (b.cache_dir) os << p << ".cache_dir=" << b.cache_dir->string() << '\n';
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

std::string policy_column(const ExperimentConfig& c) {
  if (c.policies.empty()) return "generic";
  std::string out;
  for (const auto& [agent, spec] : c.policies) {
    if (!out.empty()) out += ';';
    out += agent + "=" + spec.to_string();
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << body;
}

InstanceResult run_one(const ExperimentConfig& config,
                       const AnyInstance& instance, std::uint64_t seed,
                       std::uint64_t index,
                       const std::map<std::string, AgentBackend*>& shared) {
  InstanceResult r;
  r.instance_id = instance_id(instance);
  const auto env = make_environment(instance, config.task_options);
  ConversationKit kit(config, *env, seed, index, shared);
  try {
    r.transcript = run_conversation(kit.conversation_config(), kit.pattern(),
                                    kit.participants(), *env);
    r.reward = r.transcript.reward.value_or(Reward{}).value;
  } catch (const ConversationAborted& e) {
    spdlog::warn("instance {} seed {} aborted: {}", r.instance_id, seed,
                 e.what());
    r.transcript = e.partial();
    r.transcript.reward = Reward(0.0);
    r.aborted = true;
    r.error = e.what();
  }
  r.cost = cost_of(r.transcript);
  r.messages = static_cast<int>(r.transcript.turns.size());
  return r;
}

}  // namespace

std::string PolicySpec::to_string() const {
  switch (kind) {
    case Kind::kGeneric: return "generic";
    case Kind::kNever: return "never";
    case Kind::kRandom: return "random";
    case Kind::kThreshold: return fmt::format("threshold:{}", theta);
    case Kind::kPrompt: return "prompt";
    case Kind::kOracle: return "oracle";
  }
  return "generic";
}

PolicySpec parse_policy_spec(const std::string& text) {
  PolicySpec p;
  if (text == "generic") return p;
  if (text == "never") {
    p.kind = PolicySpec::Kind::kNever;
  } else if (text == "random") {
    p.kind = PolicySpec::Kind::kRandom;
  } else if (text == "prompt") {
    p.kind = PolicySpec::Kind::kPrompt;
  } else if (text == "oracle") {
    p.kind = PolicySpec::Kind::kOracle;
  } else if (text.starts_with("threshold")) {
    p.kind = PolicySpec::Kind::kThreshold;
    if (text.size() > 9) {
      if (text[9] != ':') throw ConfigError("bad policy " + text);
      p.theta = parse_real("policy", text.substr(10));
    }
    ThresholdRule rule(p.theta);  // range check
  } else {
    throw ConfigError("unknown policy '" + text + "'");
  }
  return p;
}

std::string InstanceSource::to_string() const {
  if (kind == Kind::kFile) return "file:" + path.string();
  return "generate:" + std::to_string(first) + "-" + std::to_string(last);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::string raw;
  int lineno = 0;
  bool have_task = false;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " +
                        key);
    }
    try {
      if (key == "task") {
        if (std::find(task_names().begin(), task_names().end(), v) ==
            task_names().end()) {
          throw ConfigError("unknown task '" + v + "'");
        }
        c.task = v;
        have_task = true;
      } else if (key == "pattern") {
        c.pattern = parse_pattern(v);
      } else if (key.starts_with("policy.")) {
        c.policies[key.substr(7)] = parse_policy_spec(v);
      } else if (key.starts_with("backend.")) {
        const auto rest = key.substr(8);
        const auto dot = rest.find('.');
        auto& b = c.backends[rest.substr(0, dot)];
        if (dot == std::string::npos) {
          if (v == "http") {
            b.kind = BackendKind::kHttp;
          } else if (v == "scripted") {
            b.kind = BackendKind::kScripted;
          } else {
            throw ConfigError("backend must be scripted or http");
          }
        } else {
          set_backend_field(b, key, rest.substr(dot + 1), v);
        }
      } else if (key == "chunk_size") {
        c.chunk_size = parse_int<int>(key, v);
      } else if (key == "max_rounds") {
        c.max_rounds = parse_int<int>(key, v);
        c.tree_budget.max_rounds = c.max_rounds;
      } else if (key == "seeds") {
        c.seeds = parse_seeds(v);
      } else if (key == "instances") {
        if (v.starts_with("generate:")) {
          c.instances.kind = InstanceSource::Kind::kGenerate;
          std::tie(c.instances.first, c.instances.last) =
              parse_range(key, v.substr(9));
        } else if (v.starts_with("file:")) {
          c.instances.kind = InstanceSource::Kind::kFile;
          c.instances.path = v.substr(5);
        } else {
          throw ConfigError("instances must be generate:a-b or file:path");
        }
      } else if (key == "termination") {
        if (v == "either") {
          c.termination = Termination::kEither;
        } else if (v == "task") {
          c.termination = Termination::kTaskSignal;
        } else if (v == "rounds") {
          c.termination = Termination::kMaxRounds;
        } else {
          throw ConfigError("termination must be either, task or rounds");
        }
      } else if (key == "concise") {
        c.concise = parse_bool(key, v);
      } else if (key == "threads") {
        c.threads = parse_int<int>(key, v);
      } else if (key.starts_with("task.")) {
        c.task_options[key.substr(5)] = v;
      } else if (key == "tree.branches") {
        c.tree_budget.max_branches = parse_int<int>(key, v);
      } else if (key == "tree.rollouts") {
        c.tree_budget.rollouts_per_node = parse_int<int>(key, v);
      } else if (key == "tree.max_nodes") {
        c.tree_budget.max_speaking_nodes = parse_int<int>(key, v);
      } else if (key == "tree.temperature") {
        c.tree_budget.temperature = parse_real(key, v);
      } else if (key == "tree.rollout") {
        if (v != "random" && v != "never") {
          throw ConfigError("tree.rollout must be random or never");
        }
        c.tree_rollout = v;
      } else {
        throw ConfigError("unknown key " + key);
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_task) throw ConfigError("config needs task=");
  if (c.chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
  if (c.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.pattern) validate(*c.pattern);
  for (const auto& [agent, b] : c.backends) {
    try {
      validate(b);
    } catch (const ConfigError& e) {
      throw ConfigError("backend." + agent + ": " + e.what());
    }
  }
  validate(c.tree_budget);
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in);
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "task=" << c.task << '\n';
  if (c.pattern) os << "pattern=" << to_string(*c.pattern) << '\n';
  for (const auto& [agent, p] : c.policies) {
    os << "policy." << agent << '=' << p.to_string() << '\n';
  }
  for (const auto& [agent, b] : c.backends) backend_lines(os, agent, b);
  os << "chunk_size=" << c.chunk_size << '\n';
  os << "max_rounds=" << c.max_rounds << '\n';
  os << "seeds=";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    os << (i ? "," : "") << c.seeds[i];
  }
  os << '\n';
  os << "instances=" << c.instances.to_string() << '\n';
  os << "termination=" << termination_name(c.termination) << '\n';
  os << "concise=" << (c.concise ? "true" : "false") << '\n';
  os << "threads=" << c.threads << '\n';
  for (const auto& [k, v] : c.task_options) os << "task." << k << '=' << v << '\n';
  os << "tree.branches=" << c.tree_budget.max_branches << '\n';
  os << "tree.rollouts=" << c.tree_budget.rollouts_per_node << '\n';
  os << "tree.max_nodes=" << c.tree_budget.max_speaking_nodes << '\n';
  os << "tree.temperature=" << fmt::format("{}", c.tree_budget.temperature)
     << '\n';
  os << "tree.rollout=" << c.tree_rollout << '\n';
  return os.str();
}

std::string config_digest(const ExperimentConfig& c) {
  // threads does not change results, so it stays out of the digest.
  auto copy = c;
  copy.threads = 1;
  return ResponseCache::digest(to_text(copy)).substr(0, 16);
}

std::vector<AnyInstance> load_instances(const ExperimentConfig& c) {
  std::vector<AnyInstance> out;
  if (c.instances.kind == InstanceSource::Kind::kFile) {
    out = read_instances(c.instances.path);
  } else {
    for (auto s = c.instances.first; s <= c.instances.last; ++s) {
      out.push_back(gen_instance(c.task, s, c.task_options));
    }
  }
  for (const auto& i : out) {
    if (task_of(i) != c.task) {
      throw ConfigError("instance " + instance_id(i) + " belongs to task " +
                        task_of(i) + ", config says " + c.task);
    }
  }
  if (out.empty()) throw ConfigError("no instances");
  return out;
}

ConversationKit::ConversationKit(
    const ExperimentConfig& config, const Environment& env, std::uint64_t seed,
    std::uint64_t index, const std::map<std::string, AgentBackend*>& shared)
    : config_(config), env_(env), seed_(seed) {
  const auto agents = env.agents();
  auto known = [&](const std::string& name) {
    return std::any_of(agents.begin(), agents.end(),
                       [&](const AgentId& a) { return a.name == name; });
  };
  for (const auto& [agent, spec] : config.policies) {
    if (!known(agent)) throw ConfigError("policy for unknown agent " + agent);
  }
  for (const auto& [agent, b] : config.backends) {
    if (!known(agent)) throw ConfigError("backend for unknown agent " + agent);
  }
  const PatternSpec pat = pattern();
  for (const auto& m : pattern_members(pat)) {
    if (!known(m)) throw ConfigError("pattern names unknown agent " + m);
  }

  for (const auto& a : agents) {
    Participant p;
    p.id = a;
    p.concise = config.concise;
    if (const auto it = shared.find(a.name); it != shared.end()) {
      p.backend = it->second;
    } else {
      owned_backends_.push_back(make_scripted_backend(env, a.name));
      p.backend = owned_backends_.back().get();
    }
    const auto ps = config.policies.find(a.name);
    if (ps != config.policies.end()) {
      const auto& spec = ps->second;
      const bool http = shared.contains(a.name);
      std::unique_ptr<InterruptionPolicy> pol;
      switch (spec.kind) {
        case PolicySpec::Kind::kGeneric: break;
        case PolicySpec::Kind::kNever:
          pol = std::make_unique<NeverInterrupt>();
          break;
        case PolicySpec::Kind::kRandom:
          pol = std::make_unique<RandomInterrupt>(
              derive_seed(derive_seed(seed, index), hash_string(a.name)));
          break;
        case PolicySpec::Kind::kThreshold: {
          std::shared_ptr<ScoreSource> src;
          if (http) {
            src = std::make_shared<BackendScoreSource>(
                *p.backend, PromptTemplate::from_asset("interruption"), "");
          } else {
            const Environment* e = &env_;
            src = std::make_shared<FunctionScoreSource>(
                [e](const PolicyContext& ctx) { return e->scripted_score(ctx); });
          }
          pol = std::make_unique<ThresholdPolicy>(std::move(src),
                                                  ThresholdRule(spec.theta));
          break;
        }
        case PolicySpec::Kind::kPrompt:
          if (!http) {
            throw ConfigError("prompt policy for " + a.name +
                              " needs backend." + a.name + "=http");
          }
          pol = std::make_unique<PromptPolicy>(
              *p.backend, PromptTemplate::from_asset("interruption"), "");
          break;
        case PolicySpec::Kind::kOracle: {
          const Environment* e = &env_;
          pol = std::make_unique<PredicatePolicy>(
              "oracle",
              [e](const PolicyContext& ctx) { return e->key_delivered(ctx); });
          break;
        }
      }
      if (pol) {
        p.policy = pol.get();
        owned_policies_.push_back(std::move(pol));
      }
    }
    participants_.push_back(p);
  }
}

ConversationConfig ConversationKit::conversation_config() const {
  ConversationConfig c;
  c.max_rounds = config_.max_rounds;
  c.chunk_size = config_.chunk_size;
  c.seed = seed_;
  c.termination = config_.termination;
  return c;
}

PatternSpec ConversationKit::pattern() const {
  return config_.pattern ? *config_.pattern : env_.default_pattern();
}

std::map<std::string, AgentBackend*> ConversationKit::backends() const {
  std::map<std::string, AgentBackend*> out;
  for (const auto& p : participants_) out[p.id.name] = p.backend;
  return out;
}

std::map<std::string, std::unique_ptr<AgentBackend>> make_shared_backends(
    const ExperimentConfig& config) {
  std::map<std::string, std::unique_ptr<AgentBackend>> out;
  for (const auto& [agent, b] : config.backends) {
    if (b.kind == BackendKind::kHttp) out[agent] = make_http_backend(b);
  }
  return out;
}

SeedMetrics seed_metrics(std::uint64_t seed,
                         const std::vector<InstanceResult>& results) {
  SeedMetrics m;
  m.seed = seed;
  m.instances = static_cast<int>(results.size());
  std::vector<double> rewards, costs, messages;
  for (const auto& r : results) {
    rewards.push_back(r.reward);
    costs.push_back(static_cast<double>(r.cost));
    messages.push_back(r.messages);
    if (r.aborted) ++m.aborted;
  }
  m.success_rate = mean(rewards);
  m.cost = mean(costs);
  m.messages = mean(messages);
  return m;
}

MetricsReport aggregate_metrics(const std::vector<SeedMetrics>& per_seed) {
  if (per_seed.empty()) throw ConfigError("no seed results to aggregate");
  MetricsReport r;
  r.per_seed = per_seed;
  std::vector<double> sr, cost, msg;
  for (const auto& s : per_seed) {
    sr.push_back(s.success_rate);
    cost.push_back(s.cost);
    msg.push_back(s.messages);
  }
  r.success_rate_mean = mean(sr);
  r.success_rate_std = population_std(sr);
  r.cost_mean = mean(cost);
  r.cost_std = population_std(cost);
  r.messages_per_conversation_mean = mean(msg);
  return r;
}

ordered_json report_to_json(const MetricsReport& r) {
  ordered_json j;
  j["success_rate_mean"] = r.success_rate_mean;
  j["success_rate_std"] = r.success_rate_std;
  j["cost_mean"] = r.cost_mean;
  j["cost_std"] = r.cost_std;
  j["messages_per_conversation_mean"] = r.messages_per_conversation_mean;
  ordered_json seeds = ordered_json::array();
  for (const auto& s : r.per_seed) {
    seeds.push_back({{"seed", s.seed},
                     {"success_rate", s.success_rate},
                     {"cost", s.cost},
                     {"messages", s.messages},
                     {"instances", s.instances},
                     {"aborted", s.aborted}});
  }
  j["per_seed"] = std::move(seeds);
  return j;
}

ExperimentResult run_experiment(
    const ExperimentConfig& config,
    const std::optional<std::filesystem::path>& out_root) {
  const auto instances = load_instances(config);
  const auto owned = make_shared_backends(config);
  std::map<std::string, AgentBackend*> shared;
  for (const auto& [k, v] : owned) shared[k] = v.get();
  // Surface config errors before any conversation runs.
  for (const auto& inst : instances) {
    const auto env = make_environment(inst, config.task_options);
    ConversationKit probe(config, *env, config.seeds.front(), 0, shared);
    Conversation(probe.conversation_config(), probe.pattern(),
                 probe.participants(), *env);
  }

  ExperimentResult result;
  std::vector<SeedMetrics> per_seed;
  for (const auto seed : config.seeds) {
    std::vector<InstanceResult> runs(instances.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (auto i = next++; i < instances.size(); i = next++) {
        runs[i] = run_one(config, instances[i], seed, i, shared);
      }
    };
    const auto n = std::min<std::size_t>(config.threads, instances.size());
    if (n <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    per_seed.push_back(seed_metrics(seed, runs));
    result.runs[seed] = std::move(runs);
  }
  result.report = aggregate_metrics(per_seed);

  if (out_root) {
    const auto dir = *out_root / config_digest(config);
    std::filesystem::create_directories(dir);
    write_file(dir / "config.txt", to_text(config));
    for (const auto& [seed, runs] : result.runs) {
      std::ostringstream os;
      for (const auto& r : runs) write_jsonl(os, r.transcript);
      write_file(dir / ("transcripts_seed" + std::to_string(seed) + ".jsonl"),
                 os.str());
    }
    write_file(dir / "metrics.json", report_to_json(result.report).dump(2) + "\n");
    std::ostringstream csv;
    csv << "task,policy,seed,success_rate,cost,messages\n";
    for (const auto& s : result.report.per_seed) {
      csv << config.task << ',' << policy_column(config) << ',' << s.seed
          << ',' << fmt::format("{}", s.success_rate) << ','
          << fmt::format("{}", s.cost) << ',' << fmt::format("{}", s.messages)
          << '\n';
    }
    write_file(dir / "results.csv", csv.str());
    result.output_dir = dir;
  }
  return result;
}

std::vector<PayoffTree> sample_trees(const ExperimentConfig& config) {
  const auto instances = load_instances(config);
  auto sampling = config;
  for (auto& [agent, b] : sampling.backends) {
    b.temperature = config.tree_budget.temperature;
  }
  const auto owned = make_shared_backends(sampling);
  std::map<std::string, AgentBackend*> shared;
  for (const auto& [k, v] : owned) shared[k] = v.get();
  std::vector<PayoffTree> trees;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto env = make_environment(instances[i], config.task_options);
    for (const auto seed : config.seeds) {
      ConversationKit kit(config, *env, seed, i, shared);
      TreeSetup setup;
      setup.env = env.get();
      setup.config = kit.conversation_config();
      setup.pattern = kit.pattern();
      setup.backends = kit.backends();
      setup.concise = config.concise;
      setup.rollout_policy = config.tree_rollout == "never"
                                 ? never_rollouts(env->interruptor())
                                 : random_rollouts(env->interruptor());
      setup.case_id = instance_id(instances[i]) + "@" + std::to_string(seed);
      auto tree = sample_tree(setup, config.tree_budget, seed);
      trees.push_back(std::move(tree));
    }
  }
  return trees;
}

bool breakeven_safe(std::int64_t message_len, std::int64_t chunk_size) {
  if (message_len < 1 || chunk_size < 1) {
    throw ConfigError("message length and chunk size must be >= 1");
  }
  return chunk_size * chunk_size > message_len;
}

}  // namespace intercomm
