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

#include "intercomm/instances_io.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "intercomm/error.h"

namespace intercomm {

namespace {

const std::map<std::string, std::set<std::string>>& allowed_options() {
  static const std::map<std::string, std::set<std::string>> kAllowed = {
      {"pictionary",
       {"description_tokens", "attribute_count", "min_fraction",
        "max_fraction", "distractors", "clues_per_turn"}},
      {"meeting", {}},
      {"debate", {"always_wait"}},
      {"relay",
       {"facts", "min_tokens", "max_tokens", "placement", "clarification",
        "miss"}},
  };
  return kAllowed;
}

void check_options(const std::string& task, const TaskOptions& opts) {
  const auto it = allowed_options().find(task);
  if (it == allowed_options().end()) throw ConfigError("unknown task: " + task);
  for (const auto& [k, v] : opts) {
    if (!it->second.contains(k)) {
      throw ConfigError("task " + task + " has no option " + k);
    }
  }
}

int int_opt(const TaskOptions& o, const std::string& key, int fallback) {
  const auto it = o.find(key);
  if (it == o.end()) return fallback;
  int v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("option " + key + " expects an integer, got " + s);
  }
  return v;
}

double real_opt(const TaskOptions& o, const std::string& key,
                double fallback) {
  const auto it = o.find(key);
  if (it == o.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("option " + key + " expects a number, got " +
                      it->second);
  }
}

bool bool_opt(const TaskOptions& o, const std::string& key, bool fallback) {
  const auto it = o.find(key);
  if (it == o.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("option " + key + " expects true or false");
}

ordered_json windows_json(const std::vector<TimeWindow>& ws) {
  ordered_json a = ordered_json::array();
  for (const auto& w : ws) a.push_back({w.start, w.end});
  return a;
}

std::vector<TimeWindow> windows_from(const ordered_json& a) {
  std::vector<TimeWindow> out;
  for (const auto& w : a) out.push_back({w.at(0).get<int>(), w.at(1).get<int>()});
  return out;
}

ordered_json to_json(const PictionaryInstance& p) {
  ordered_json d = ordered_json::array();
  for (const auto& c : p.distractors) {
    d.push_back({{"name", c.name}, {"attributes", c.attributes}});
  }
  return {{"id", p.id},
          {"entity", p.entity},
          {"attributes", p.attributes},
          {"forbidden_surface_forms", p.forbidden_surface_forms},
          {"distractors", std::move(d)},
          {"identifying_prefix", p.identifying_prefix}};
}

PictionaryInstance pictionary_from(const ordered_json& j) {
  PictionaryInstance p;
  p.id = j.at("id").get<std::string>();
  p.entity = j.at("entity").get<std::string>();
  p.attributes = j.at("attributes").get<std::vector<TokenList>>();
  p.forbidden_surface_forms =
      j.at("forbidden_surface_forms").get<std::vector<std::string>>();
  for (const auto& c : j.at("distractors")) {
    p.distractors.push_back({c.at("name").get<std::string>(),
                             c.at("attributes").get<std::vector<TokenList>>()});
  }
  p.identifying_prefix = j.at("identifying_prefix").get<int>();
  return p;
}

ordered_json to_json(const MeetingInstance& m) {
  ordered_json planners = ordered_json::array();
  for (const auto& p : m.planners) {
    planners.push_back({{"agent", p.agent},
                        {"name", p.name},
                        {"role", p.role},
                        {"location", p.location},
                        {"duration", p.duration},
                        {"availability", windows_json(p.availability)},
                        {"preferred", windows_json(p.preferred)},
                        {"preferences", p.preferences}});
  }
  return {{"id", m.id},
          {"locations", m.locations},
          {"travel_minutes", m.travel_minutes},
          {"planners", std::move(planners)},
          {"traveler",
           {{"name", m.traveler.name},
            {"start_location", m.traveler.start_location},
            {"departure", m.traveler.departure}}},
          {"gold", schedule_to_json(m.gold)}};
}

MeetingInstance meeting_from(const ordered_json& j) {
  MeetingInstance m;
  m.id = j.at("id").get<std::string>();
  m.locations = j.at("locations").get<std::vector<std::string>>();
  m.travel_minutes = j.at("travel_minutes").get<std::vector<std::vector<int>>>();
  for (const auto& p : j.at("planners")) {
    PlannerProfile pp;
    pp.agent = p.at("agent").get<std::string>();
    pp.name = p.at("name").get<std::string>();
    pp.role = p.at("role").get<std::string>();
    pp.location = p.at("location").get<int>();
    pp.duration = p.at("duration").get<int>();
    pp.availability = windows_from(p.at("availability"));
    pp.preferred = windows_from(p.at("preferred"));
    pp.preferences = p.at("preferences").get<std::string>();
    m.planners.push_back(std::move(pp));
  }
  const auto& t = j.at("traveler");
  m.traveler = {t.at("name").get<std::string>(),
                t.at("start_location").get<int>(),
                t.at("departure").get<int>()};
  m.gold = schedule_from_json(j.at("gold"));
  return m;
}

ordered_json to_json(const DebateInstance& d) {
  return {{"id", d.id},
          {"question", d.question},
          {"correct_answer", std::string(1, d.correct_answer)},
          {"incorrect_answer", std::string(1, d.incorrect_answer)},
          {"pro_holds_correct", d.pro_holds_correct},
          {"evidence_pro", d.evidence_pro},
          {"evidence_con", d.evidence_con},
          {"decisive_statement", d.decisive_statement}};
}

char letter(const ordered_json& j) {
  const auto s = j.get<std::string>();
  if (s.size() != 1) throw StructuralError("answer must be one letter");
  return s[0];
}

DebateInstance debate_from(const ordered_json& j) {
  DebateInstance d;
  d.id = j.at("id").get<std::string>();
  d.question = j.at("question").get<std::string>();
  d.correct_answer = letter(j.at("correct_answer"));
  d.incorrect_answer = letter(j.at("incorrect_answer"));
  d.pro_holds_correct = j.at("pro_holds_correct").get<bool>();
  d.evidence_pro = j.at("evidence_pro").get<std::vector<std::string>>();
  d.evidence_con = j.at("evidence_con").get<std::vector<std::string>>();
  d.decisive_statement = j.at("decisive_statement").get<int>();
  return d;
}

ordered_json to_json(const RelayInstance& r) {
  ordered_json facts = ordered_json::array();
  for (const auto& f : r.facts) {
    facts.push_back({{"tokens", f.tokens}, {"key_position", f.key_position}});
  }
  return {{"id", r.id},
          {"facts", std::move(facts)},
          {"clarification_length", r.clarification_length},
          {"miss_mode", r.miss_mode == MissMode::kFail ? "fail" : "extra"}};
}

RelayInstance relay_from(const ordered_json& j) {
  RelayInstance r;
  r.id = j.at("id").get<std::string>();
  for (const auto& f : j.at("facts")) {
    r.facts.push_back({f.at("tokens").get<TokenList>(),
                       f.at("key_position").get<int>()});
  }
  r.clarification_length = j.at("clarification_length").get<int>();
  const auto mode = j.at("miss_mode").get<std::string>();
  if (mode != "fail" && mode != "extra") {
    throw StructuralError("unknown miss_mode " + mode);
  }
  r.miss_mode = mode == "fail" ? MissMode::kFail : MissMode::kExtraRound;
  return r;
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> kNames = {"pictionary", "meeting",
                                                  "debate", "relay"};
  return kNames;
}

std::string task_of(const AnyInstance& inst) {
  static const char* kTasks[] = {"pictionary", "meeting", "debate", "relay"};
  return kTasks[inst.index()];
}

std::string instance_id(const AnyInstance& inst) {
  return std::visit([](const auto& x) { return x.id; }, inst);
}

AnyInstance gen_instance(const std::string& task, std::uint64_t seed,
                         const TaskOptions& o) {
  check_options(task, o);
  if (task == "pictionary") {
    PictionaryGenOptions g;
    g.description_tokens = int_opt(o, "description_tokens", g.description_tokens);
    g.attribute_count = int_opt(o, "attribute_count", g.attribute_count);
    g.min_fraction = real_opt(o, "min_fraction", g.min_fraction);
    g.max_fraction = real_opt(o, "max_fraction", g.max_fraction);
    g.distractors = int_opt(o, "distractors", g.distractors);
    return gen_pictionary_instance(seed, g);
  }
  if (task == "meeting") return gen_meeting_instance(seed);
  if (task == "debate") return gen_debate_instance(seed);
  RelayGenOptions g;
  g.facts = int_opt(o, "facts", g.facts);
  g.min_tokens = int_opt(o, "min_tokens", g.min_tokens);
  g.max_tokens = int_opt(o, "max_tokens", g.max_tokens);
  g.clarification_length = int_opt(o, "clarification", g.clarification_length);
  if (const auto it = o.find("placement"); it != o.end()) {
    if (it->second == "end") {
      g.placement = KeyPlacement::kEnd;
    } else if (it->second == "middle") {
      g.placement = KeyPlacement::kMiddle;
    } else if (it->second == "random") {
      g.placement = KeyPlacement::kRandom;
    } else {
      throw ConfigError("placement must be end, middle or random");
    }
  }
  if (const auto it = o.find("miss"); it != o.end()) {
    if (it->second == "extra") {
      g.miss_mode = MissMode::kExtraRound;
    } else if (it->second == "fail") {
      g.miss_mode = MissMode::kFail;
    } else if (it->second == "random") {
      g.random_miss_mode = true;
    } else {
      throw ConfigError("miss must be extra, fail or random");
    }
  }
  return gen_relay_instance(seed, g);
}

std::unique_ptr<Environment> make_environment(const AnyInstance& inst,
                                              const TaskOptions& o) {
  check_options(task_of(inst), o);
  struct Visitor {
    const TaskOptions& o;
    std::unique_ptr<Environment> operator()(const PictionaryInstance& p) const {
      return std::make_unique<PictionaryEnv>(p, int_opt(o, "clues_per_turn", 0));
    }
    std::unique_ptr<Environment> operator()(const MeetingInstance& m) const {
      return std::make_unique<MeetingEnv>(m);
    }
    std::unique_ptr<Environment> operator()(const DebateInstance& d) const {
      return std::make_unique<DebateEnv>(d, bool_opt(o, "always_wait", false));
    }
    std::unique_ptr<Environment> operator()(const RelayInstance& r) const {
      return std::make_unique<RelayEnv>(r);
    }
  };
  return std::visit(Visitor{o}, inst);
}

ordered_json instance_to_json(const AnyInstance& inst) {
  ordered_json j;
  j["schema_version"] = kInstanceSchemaVersion;
  j["task"] = task_of(inst);
  j["instance"] = std::visit([](const auto& x) { return to_json(x); }, inst);
  return j;
}

AnyInstance instance_from_json(const ordered_json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kInstanceSchemaVersion) {
      throw StructuralError("unsupported instance schema_version " +
                            std::to_string(version));
    }
    const auto task = j.at("task").get<std::string>();
    const auto& body = j.at("instance");
    AnyInstance out;
    if (task == "pictionary") {
      out = pictionary_from(body);
    } else if (task == "meeting") {
      out = meeting_from(body);
    } else if (task == "debate") {
      out = debate_from(body);
    } else if (task == "relay") {
      out = relay_from(body);
    } else {
      throw StructuralError("unknown task " + task);
    }
    std::visit([](const auto& x) { validate(x); }, out);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("bad instance: ") + e.what());
  }
}

void write_instances(std::ostream& out, const std::vector<AnyInstance>& list) {
  for (const auto& i : list) out << instance_to_json(i).dump() << '\n';
}

std::vector<AnyInstance> read_instances(std::istream& in) {
  std::vector<AnyInstance> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(instance_from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw StructuralError("instance line " + std::to_string(lineno) + ": " +
                            e.what());
    }
  }
  return out;
}

std::vector<AnyInstance> read_instances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instances " + path.string());
  return read_instances(in);
}

ordered_json schedule_to_json(const Schedule& s) {
  ordered_json ms = ordered_json::array();
  for (const auto& m : s.meetings) {
    ms.push_back({{"participant", m.participant},
                  {"location", m.location},
                  {"start", format_time(m.start)},
                  {"end", format_time(m.end)}});
  }
  return {{"traveler", s.traveler}, {"meetings", std::move(ms)}};
}

Schedule schedule_from_json(const ordered_json& j) {
  Schedule s;
  s.traveler = j.at("traveler").get<std::string>();
  for (const auto& m : j.at("meetings")) {
    const auto start = parse_time(m.at("start").get<std::string>());
    const auto end = parse_time(m.at("end").get<std::string>());
    if (!start || !end) throw StructuralError("bad time in schedule");
    s.meetings.push_back({m.at("participant").get<std::string>(),
                          m.at("location").get<std::string>(), *start, *end});
  }
  return s;
}

}  // namespace intercomm
