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

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "doctest.h"
#include "intercomm/error.h"
#include "intercomm/harness.h"
#include "intercomm/json_fwd.h"
#include "intercomm/transcript_io.h"

using namespace intercomm;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("intercomm_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  return p;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const auto c = parse_config_text("task=meeting\n");
  CHECK(c.task == "meeting");
  CHECK_FALSE(c.pattern);
  CHECK(c.chunk_size == 16);
  CHECK(c.max_rounds == 10);
  CHECK(c.seeds == std::vector<std::uint64_t>{0});
  CHECK(c.termination == Termination::kEither);
  CHECK(c.threads == 1);
  CHECK(c.tree_budget.max_branches == 3);
  CHECK(c.tree_budget.rollouts_per_node == 10);
  CHECK(c.tree_rollout == "random");
}

TEST_CASE("full config parses and round trips") {
  const std::string text = R"(# comment line
task = debate
pattern=group:pro,con,moderator
policy.moderator=threshold:0.35   # trailing comment
backend.moderator=http
backend.moderator.endpoint=http://127.0.0.1:8000/v1/chat/completions
backend.moderator.model=m1
backend.moderator.logprobs=true
backend.moderator.retries=4
chunk_size=8
max_rounds=6
seeds=0-2,7
instances=generate:3-5
termination=rounds
concise=true
threads=3
task.always_wait=false
tree.branches=4
tree.rollouts=2
tree.max_nodes=5
tree.temperature=0.5
tree.rollout=never
)";
  const auto c = parse_config_text(text);
  CHECK(c.pattern == PatternSpec::GroupChat({"pro", "con", "moderator"}));
  CHECK(c.policies.at("moderator").kind == PolicySpec::Kind::kThreshold);
  CHECK(c.policies.at("moderator").theta == 0.35);
  CHECK(c.backends.at("moderator").kind == BackendKind::kHttp);
  CHECK(c.backends.at("moderator").request_logprobs);
  CHECK(c.backends.at("moderator").retries == 4);
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2, 7});
  CHECK(c.instances.first == 3);
  CHECK(c.instances.last == 5);
  CHECK(c.termination == Termination::kMaxRounds);
  CHECK(c.concise);
  CHECK(c.tree_budget.max_rounds == 6);
  CHECK(c.tree_budget.temperature == 0.5);
  CHECK(c.task_options.at("always_wait") == "false");

  const auto again = parse_config_text(to_text(c));
  CHECK(to_text(again) == to_text(c));
  CHECK(again.seeds == c.seeds);
  CHECK(again.backends.at("moderator").endpoint == c.backends.at("moderator").endpoint);
  CHECK(config_digest(again) == config_digest(c));
}

TEST_CASE("digest ignores threads and tracks everything else") {
  auto c = parse_config_text("task=pictionary\n");
  const auto d = config_digest(c);
  CHECK(d.size() == 16);
  CHECK(d.find_first_not_of("0123456789abcdef") == std::string::npos);
  c.threads = 8;
  CHECK(config_digest(c) == d);
  c.chunk_size = 4;
  CHECK(config_digest(c) != d);
}

TEST_CASE("config errors name the line") {
  CHECK(config_error("task=meeting\nchunk_size=zero\n").rfind("line 2: chunk_size", 0) == 0);
  CHECK(config_error("task=meeting\nbogus=1\n") == "line 2: unknown key bogus");
  CHECK(config_error("task=meeting\ntask=debate\n").rfind("line 2: duplicate key task", 0) == 0);
  CHECK(config_error("task=meeting\njust text\n") == "line 2: expected key=value");
  CHECK(config_error("task=chess\n").rfind("line 1: unknown task", 0) == 0);
  CHECK(config_error("task=meeting\npolicy.traveler=sometimes\n").rfind("line 2:", 0) == 0);
  CHECK(config_error("task=meeting\npolicy.traveler=threshold:1.5\n").rfind("line 2:", 0) == 0);
  CHECK(config_error("task=meeting\nseeds=5-2\n").rfind("line 2:", 0) == 0);
  CHECK(config_error("task=meeting\ninstances=some\n").rfind("line 2:", 0) == 0);
  CHECK(config_error("task=meeting\nbackend.traveler.colour=red\n").rfind("line 2:", 0) == 0);
  CHECK(config_error("task=meeting\ntree.rollout=greedy\n").rfind("line 2:", 0) == 0);
  CHECK(config_error("task=meeting\nconcise=maybe\n").rfind("line 2:", 0) == 0);
  CHECK(config_error("chunk_size=4\n") == "config needs task=");
  CHECK(config_error("task=meeting\nchunk_size=0\n") == "chunk_size must be >= 1");
  CHECK(config_error("task=meeting\nbackend.traveler=http\n").rfind("backend.traveler:", 0) == 0);
  CHECK(config_error("task=meeting\ntree.branches=1\n") == "max_branches must be >= 2");
  CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("policy spec text") {
  for (const auto* s : {"generic", "never", "random", "prompt", "oracle",
                        "threshold:0.25"}) {
    CHECK(parse_policy_spec(s).to_string() == s);
  }
  CHECK(parse_policy_spec("threshold").theta == 0.5);
  CHECK_THROWS_AS(parse_policy_spec("threshold0.3"), ConfigError);
}

TEST_CASE("aggregation uses the population standard deviation") {
  std::vector<SeedMetrics> seeds(3);
  const double sr[] = {0.4, 0.6, 0.5};
  const double cost[] = {100, 110, 120};
  for (int k = 0; k < 3; ++k) {
    seeds[k].seed = static_cast<std::uint64_t>(k);
    seeds[k].success_rate = sr[k];
    seeds[k].cost = cost[k];
    seeds[k].messages = 2.0 * k;
  }
  const auto r = aggregate_metrics(seeds);
  CHECK(r.success_rate_mean == doctest::Approx(0.5));
  CHECK(r.success_rate_std == doctest::Approx(std::sqrt(0.02 / 3)));
  CHECK(r.cost_mean == doctest::Approx(110.0));
  CHECK(r.cost_std == doctest::Approx(std::sqrt(200.0 / 3.0)));
  CHECK(r.messages_per_conversation_mean == doctest::Approx(2.0));

  const auto two = aggregate_metrics({seeds[0], seeds[1]});
  CHECK(two.success_rate_mean == doctest::Approx(0.5));
  CHECK(two.success_rate_std == doctest::Approx(0.1));
  CHECK_THROWS_AS(aggregate_metrics({}), ConfigError);

  const auto j = report_to_json(r);
  CHECK(j["per_seed"].size() == 3);
  CHECK(j.begin().key() == "success_rate_mean");
}

TEST_CASE("seed metrics count aborted runs as failures") {
  std::vector<InstanceResult> runs(4);
  runs[0].reward = 1.0;
  runs[0].cost = 10;
  runs[1].reward = 1.0;
  runs[1].cost = 20;
  runs[2].reward = 0.0;
  runs[2].cost = 30;
  runs[3].aborted = true;
  runs[3].cost = 40;
  runs[3].messages = 4;
  const auto m = seed_metrics(9, runs);
  CHECK(m.success_rate == 0.5);
  CHECK(m.cost == 25.0);
  CHECK(m.messages == 1.0);
  CHECK(m.aborted == 1);
  CHECK(m.instances == 4);
}

TEST_CASE("break-even rule") {
  CHECK(breakeven_safe(100, 16));
  CHECK(breakeven_safe(100, 11));
  CHECK_FALSE(breakeven_safe(100, 10));
  CHECK_FALSE(breakeven_safe(100, 8));
  CHECK(breakeven_safe(1, 2));
  CHECK_THROWS_AS(breakeven_safe(0, 4), ConfigError);
  CHECK_THROWS_AS(breakeven_safe(10, 0), ConfigError);
}

TEST_CASE("experiment output layout") {
  const auto root = scratch("run");
  auto c = parse_config_text(
      "task=pictionary\npolicy.guesser=oracle\nchunk_size=8\nseeds=0-1\n"
      "instances=generate:0-3\n");
  const auto r = run_experiment(c, root);
  CHECK(r.output_dir == root / config_digest(c));
  CHECK(r.report.success_rate_mean == 1.0);
  CHECK(r.report.per_seed.size() == 2);
  for (const auto* f : {"config.txt", "transcripts_seed0.jsonl",
                        "transcripts_seed1.jsonl", "metrics.json", "results.csv"}) {
    CHECK(std::filesystem::exists(r.output_dir / f));
  }
  CHECK(slurp(r.output_dir / "config.txt") == to_text(c));
  const auto csv = slurp(r.output_dir / "results.csv");
  CHECK(csv.rfind("task,policy,seed,success_rate,cost,messages\n", 0) == 0);
  CHECK(csv.find("pictionary,guesser=oracle,1,1,") != std::string::npos);
  const auto metrics = ordered_json::parse(slurp(r.output_dir / "metrics.json"));
  CHECK(metrics["success_rate_mean"] == 1.0);
  std::ifstream tin(r.output_dir / "transcripts_seed0.jsonl");
  CHECK(read_transcripts(tin).size() == 4);
  std::filesystem::remove_all(root);
}

TEST_CASE("threads do not change results") {
  auto c = parse_config_text(
      "task=relay\npolicy.receiver=random\nchunk_size=4\nseeds=0-2\n"
      "instances=generate:0-11\n");
  const auto one = run_experiment(c);
  c.threads = 4;
  const auto four = run_experiment(c);
  for (const auto& [seed, runs] : one.runs) {
    REQUIRE(four.runs.at(seed).size() == runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
      CHECK(four.runs.at(seed)[i].transcript == runs[i].transcript);
    }
  }
}

TEST_CASE("kit rejects unknown agents and prompt without http") {
  const auto inst = gen_instance("meeting", 1);
  const auto env = make_environment(inst);
  auto c = parse_config_text("task=meeting\npolicy.nobody=never\n");
  CHECK_THROWS_AS(ConversationKit(c, *env, 0, 0, {}), ConfigError);
  c = parse_config_text("task=meeting\npolicy.traveler=prompt\n");
  CHECK_THROWS_AS(ConversationKit(c, *env, 0, 0, {}), ConfigError);
  c = parse_config_text("task=meeting\npattern=mutual:traveler,ghost\n");
  CHECK_THROWS_AS(ConversationKit(c, *env, 0, 0, {}), ConfigError);
  c = parse_config_text("task=meeting\npolicy.traveler=threshold:0.5\n");
  ConversationKit kit(c, *env, 0, 0, {});
  int with_policy = 0;
  for (const auto& p : kit.participants()) with_policy += p.policy != nullptr;
  CHECK(with_policy == 1);
}

TEST_CASE("instances from a file must match the task") {
  const auto dir = scratch("inst");
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.jsonl";
  {
    std::ofstream out(path);
    write_instances(out, {gen_instance("meeting", 2), gen_instance("meeting", 3)});
  }
  auto c = parse_config_text("task=meeting\ninstances=file:" + path.string() + "\n");
  CHECK(load_instances(c).size() == 2);
  c = parse_config_text("task=debate\ninstances=file:" + path.string() + "\n");
  CHECK_THROWS_AS(load_instances(c), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("instance files round trip every task") {
  for (const auto& task : task_names()) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto inst = gen_instance(task, s);
      CHECK(task_of(inst) == task);
      CHECK(instance_from_json(instance_to_json(inst)) == inst);
    }
  }
  std::stringstream ss;
  write_instances(ss, {gen_instance("relay", 1)});
  auto line = ss.str();
  CHECK(line.find("\"schema_version\":1") != std::string::npos);
  line.replace(line.find("\"schema_version\":1"), 18, "\"schema_version\":9");
  std::stringstream bad(line);
  CHECK_THROWS(read_instances(bad));
  CHECK_THROWS_AS(gen_instance("relay", 1, {{"placement", "left"}}), ConfigError);
  CHECK_THROWS_AS(gen_instance("meeting", 1, {{"facts", "2"}}), ConfigError);
  CHECK_THROWS_AS(gen_instance("chess", 1), ConfigError);
}

TEST_CASE("http agents drive a run end to end") {
  const auto inst = std::get<PictionaryInstance>(gen_instance("pictionary", 0));
  httplib::Server server;
  std::atomic<int> judged{0}, spoke{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                          httplib::Response& res) {
    const auto body = ordered_json::parse(req.body);
    const std::string last = body["messages"].back()["content"];
    std::string reply;
    if (last.find("determine if you should interrupt") != std::string::npos) {
      ++judged;
      reply = last.find(inst.attributes[1].front()) != std::string::npos ? "Yes"
                                                                          : "No";
    } else {
      ++spoke;
      reply = "is it " + inst.entity;
    }
    ordered_json out;
    out["choices"] = ordered_json::array(
        {{{"message", {{"role", "assistant"}, {"content", reply}}}}});
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const auto c = parse_config_text(
      "task=pictionary\npolicy.guesser=prompt\nbackend.guesser=http\n"
      "backend.guesser.endpoint=http://127.0.0.1:" + std::to_string(port) +
      "/v1/chat/completions\nbackend.guesser.model=stub\nchunk_size=8\n"
      "instances=generate:0-0\n");
  const auto r = run_experiment(c);
  server.stop();
  th.join();
  REQUIRE(r.runs.at(0).size() == 1);
  const auto& run = r.runs.at(0).front();
  CHECK_FALSE(run.aborted);
  CHECK(run.reward == 1.0);
  CHECK(judged > 0);
  CHECK(spoke >= 1);
  CHECK(run.transcript.turns.front().truncated_at.has_value());
}

TEST_CASE("an unreachable backend aborts instances without stopping the run") {
  auto c = parse_config_text(
      "task=meeting\nbackend.traveler=http\n"
      "backend.traveler.endpoint=http://127.0.0.1:9/v1/chat/completions\n"
      "backend.traveler.model=m\nbackend.traveler.retries=0\n"
      "backend.traveler.timeout_ms=200\ninstances=generate:0-1\n");
  const auto r = run_experiment(c);
  CHECK(r.report.success_rate_mean == 0.0);
  CHECK(r.report.per_seed.front().aborted == 2);
}
