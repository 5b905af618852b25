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

#include "intercomm/meeting.h"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "intercomm/error.h"
#include "intercomm/prompts.h"
#include "intercomm/rng.h"
#include "wordlists.h"

namespace intercomm {

int MeetingInstance::location_index(const std::string& name) const {
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (locations[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void validate(const MeetingInstance& inst) {
  const auto n = inst.locations.size();
  if (n < 2) throw StructuralError("meeting needs two locations");
  if (inst.travel_minutes.size() != n) {
    throw StructuralError("travel matrix size mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (inst.travel_minutes[i].size() != n) {
      throw StructuralError("travel matrix is not square");
    }
    if (inst.travel_minutes[i][i] != 0) {
      throw StructuralError("travel matrix diagonal must be zero");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (inst.travel_minutes[i][j] != inst.travel_minutes[j][i]) {
        throw StructuralError("travel matrix is not symmetric");
      }
      if (i != j && inst.travel_minutes[i][j] <= 0) {
        throw StructuralError("off-diagonal travel time must be positive");
      }
    }
  }
  if (inst.planners.size() != 2) {
    throw StructuralError("meeting needs exactly two planners");
  }
  auto check_loc = [&](int loc) {
    if (loc < 0 || loc >= static_cast<int>(n)) {
      throw StructuralError("location index out of range");
    }
  };
  check_loc(inst.traveler.start_location);
  for (const auto& p : inst.planners) {
    check_loc(p.location);
    if (p.duration <= 0) throw StructuralError("meeting duration must be > 0");
    if (p.availability.empty()) {
      throw StructuralError(p.name + " has no availability");
    }
    for (const auto& w : p.availability) {
      if (w.start >= w.end) throw StructuralError("window is not well-ordered");
    }
    for (const auto& w : p.preferred) {
      if (w.start >= w.end) throw StructuralError("window is not well-ordered");
    }
  }
}

std::string format_time(int minutes) {
  std::ostringstream os;
  os << minutes / 60 << ':' << (minutes % 60 < 10 ? "0" : "") << minutes % 60;
  return os.str();
}

std::optional<int> parse_time(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon > 2 ||
      text.size() - colon != 3) {
    return std::nullopt;
  }
  int h = 0, m = 0;
  for (std::size_t i = 0; i < colon; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    h = h * 10 + (text[i] - '0');
  }
  for (std::size_t i = colon + 1; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    m = m * 10 + (text[i] - '0');
  }
  if (h > 23 || m > 59) return std::nullopt;
  return h * 60 + m;
}

std::string format_schedule(const Schedule& s) {
  std::string out = "Stop!";
  for (const auto& m : s.meetings) {
    out += "\n" + s.traveler + " - " + m.participant + ", " +
           format_time(m.start) + " \xE2\x80\x93 " + format_time(m.end) +
           ", at " + m.location + ".";
  }
  return out;
}

std::optional<Schedule> parse_schedule(std::string_view text) {
  const auto stop = text.find("Stop!");
  if (stop == std::string_view::npos) return std::nullopt;
  static const std::regex kLine(
      "([A-Za-z][A-Za-z' ]*?)\\s+-\\s+([A-Za-z][A-Za-z' ]*?)\\s*,\\s*"
      "(\\d{1,2}:\\d{2})\\s*(?:-|\xE2\x80\x93|\xE2\x80\x94)\\s*"
      "(\\d{1,2}:\\d{2})\\s*,\\s*at\\s+([^.\\n]+?)\\s*\\.");
  const std::string rest(text.substr(stop + 5));
  Schedule s;
  for (auto it = std::sregex_iterator(rest.begin(), rest.end(), kLine);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const auto start = parse_time(m[3].str());
    const auto end = parse_time(m[4].str());
    if (!start || !end) return std::nullopt;
    std::string traveler = m[1].str();
    while (!traveler.empty() && traveler.front() == ' ') traveler.erase(0, 1);
    if (s.meetings.empty()) {
      s.traveler = traveler;
    } else if (traveler != s.traveler) {
      return std::nullopt;
    }
    s.meetings.push_back({m[2].str(), m[5].str(), *start, *end});
  }
  return s;
}

VerifyResult check_schedule(const MeetingInstance& inst, const Schedule& s) {
  if (s.traveler != inst.traveler.name) {
    return {false, "schedule is not for " + inst.traveler.name};
  }
  if (s.meetings.size() != inst.planners.size()) {
    return {false, "expected exactly " + std::to_string(inst.planners.size()) +
                       " meetings, found " + std::to_string(s.meetings.size())};
  }
  std::set<std::string> met;
  for (const auto& m : s.meetings) {
    const auto it =
        std::find_if(inst.planners.begin(), inst.planners.end(),
                     [&](const PlannerProfile& p) { return p.name == m.participant; });
    if (it == inst.planners.end()) {
      return {false, "unknown participant " + m.participant};
    }
    if (!met.insert(m.participant).second) {
      return {false, m.participant + " is scheduled twice"};
    }
    if (m.location != inst.locations[it->location]) {
      return {false, m.participant + " must be met at " +
                         inst.locations[it->location]};
    }
    if (m.start >= m.end || m.end - m.start != it->duration) {
      return {false, m.participant + " needs " + std::to_string(it->duration) +
                         " minutes"};
    }
    const bool available =
        std::any_of(it->availability.begin(), it->availability.end(),
                    [&](const TimeWindow& w) { return w.contains(m.start, m.end); });
    if (!available) {
      return {false, m.participant + " is not available " +
                         format_time(m.start) + "-" + format_time(m.end)};
    }
  }
  auto order = s.meetings;
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  int here = inst.traveler.start_location;
  int free_at = inst.traveler.departure;
  for (const auto& m : order) {
    const int loc = inst.location_index(m.location);
    const int arrive = free_at + inst.travel(here, loc);
    if (m.start < arrive) {
      return {false, "cannot reach " + m.location + " by " +
                         format_time(m.start) + " (earliest " +
                         format_time(arrive) + ")"};
    }
    here = loc;
    free_at = m.end;
  }
  return {true, {}};
}

Reward verify_schedule(const MeetingInstance& inst, const Schedule& s) {
  return Reward(check_schedule(inst, s).ok ? 1.0 : 0.0);
}

Reward verify_schedule_text(const MeetingInstance& inst,
                            std::string_view text) {
  const auto s = parse_schedule(text);
  if (!s) {
    spdlog::debug("{}: unparseable schedule", inst.id);
    return Reward(0.0);
  }
  const auto r = check_schedule(inst, *s);
  if (!r.ok) spdlog::debug("{}: schedule rejected: {}", inst.id, r.reason);
  return Reward(r.ok ? 1.0 : 0.0);
}

Schedule mutate_schedule(const MeetingInstance& inst, ScheduleMutation mut) {
  Schedule s = inst.gold;
  auto planner_of = [&](const ScheduledMeeting& m) -> const PlannerProfile& {
    for (const auto& p : inst.planners) {
      if (p.name == m.participant) return p;
    }
    throw StructuralError("gold schedule names an unknown participant");
  };
  switch (mut) {
    case ScheduleMutation::kAvailabilityShift: {
      auto& m = s.meetings.front();
      const auto& p = planner_of(m);
      const auto w = std::find_if(
          p.availability.begin(), p.availability.end(),
          [&](const TimeWindow& w) { return w.contains(m.start, m.end); });
      m.start = w->end - p.duration + 5;
      m.end = m.start + p.duration;
      break;
    }
    case ScheduleMutation::kTravelGap: {
      auto& a = s.meetings[0];
      auto& b = s.meetings[1];
      const int gap = inst.travel(inst.location_index(a.location),
                                  inst.location_index(b.location));
      const int len = b.end - b.start;
      b.start = a.end + gap - 1;
      b.end = b.start + len;
      break;
    }
    case ScheduleMutation::kExtraMeeting: {
      const auto& last = s.meetings.back();
      auto extra = s.meetings.front();
      const int len = extra.end - extra.start;
      extra.start = last.end + inst.travel(inst.location_index(last.location),
                                           inst.location_index(extra.location)) +
                    10;
      extra.end = extra.start + len;
      s.meetings.push_back(extra);
      break;
    }
  }
  return s;
}

MeetingInstance gen_meeting_instance(std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, "meeting", attempt));
    MeetingInstance inst;
    inst.id = "meeting-" + std::to_string(seed);

    std::vector<int> idx(words::kDistricts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const int n = uniform_int(rng, 4, 6);
    for (int i = 0; i < n; ++i) {
      inst.locations.emplace_back(words::kDistricts[idx[i]]);
    }
    inst.travel_minutes.assign(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        inst.travel_minutes[i][j] = inst.travel_minutes[j][i] =
            uniform_int(rng, 5, 30);
      }
    }

    std::vector<int> people(words::kPeople.size());
    for (std::size_t i = 0; i < people.size(); ++i) {
      people[i] = static_cast<int>(i);
    }
    std::shuffle(people.begin(), people.end(), rng);
    inst.traveler.name = std::string(words::kPeople[people[0]]);
    inst.traveler.start_location = 0;
    inst.traveler.departure = 480 + 15 * uniform_int(rng, 0, 8);

    std::vector<int> spots;
    for (int i = 1; i < n; ++i) spots.push_back(i);
    std::shuffle(spots.begin(), spots.end(), rng);
    static constexpr int kDurations[] = {30, 45, 60, 90};
    for (int k = 0; k < 2; ++k) {
      PlannerProfile p;
      p.agent = k == 0 ? MeetingEnv::kPlanner1 : MeetingEnv::kPlanner2;
      p.name = std::string(words::kPeople[people[k + 1]]);
      p.role = std::string(
          words::kRoles[uniform_int(rng, 0, words::kRoles.size() - 1)]);
      p.location = spots[k];
      p.duration = kDurations[uniform_int(rng, 0, 3)];
      p.preferences = std::string(
          words::kFiller[uniform_int(rng, 0, words::kFiller.size() - 1)]);
      inst.planners.push_back(std::move(p));
    }

    // Gold: meet `first` then `second`, with slack before each.
    const int first = uniform_int(rng, 0, 1);
    auto& pa = inst.planners[first];
    auto& pb = inst.planners[1 - first];
    const int slack1 = 5 * uniform_int(rng, 0, 9);
    const int slack2 = 5 * uniform_int(rng, 0, 9);
    const int s1 = inst.traveler.departure +
                   inst.travel(inst.traveler.start_location, pa.location) +
                   slack1;
    const int e1 = s1 + pa.duration;
    const int s2 = e1 + inst.travel(pa.location, pb.location) + slack2;
    const int e2 = s2 + pb.duration;

    // The second window opens early enough that a one-minute travel
    // shortfall stays inside it.
    auto open = [&](PlannerProfile& p, int s, int e, int min_before) {
      const TimeWindow w{s - min_before - 5 * uniform_int(rng, 0, 6),
                         e + 10 + 5 * uniform_int(rng, 0, 10)};
      p.availability.push_back(w);
      p.preferred.push_back({std::max(w.start, s - 15), std::min(w.end, e + 15)});
      if (uniform_int(rng, 0, 1) == 1) {
        const int gap = 60 + 15 * uniform_int(rng, 0, 4);
        const int len = p.duration + 15 * uniform_int(rng, 1, 4);
        if (w.end + gap + len <= 21 * 60) {
          p.availability.push_back({w.end + gap, w.end + gap + len});
        } else if (w.start - gap - len >= 7 * 60) {
          p.availability.insert(p.availability.begin(),
                                {w.start - gap - len, w.start - gap});
        }
      }
    };
    open(pa, s1, e1, 0);
    open(pb, s2, e2, slack2 + 5);

    inst.gold.traveler = inst.traveler.name;
    inst.gold.meetings = {
        {pa.name, inst.locations[pa.location], s1, e1},
        {pb.name, inst.locations[pb.location], s2, e2},
    };
    validate(inst);
    if (e2 > 23 * 60) continue;
    if (!check_schedule(inst, inst.gold).ok) continue;
    bool sound = true;
    for (auto m : {ScheduleMutation::kAvailabilityShift,
                   ScheduleMutation::kTravelGap,
                   ScheduleMutation::kExtraMeeting}) {
      if (check_schedule(inst, mutate_schedule(inst, m)).ok) sound = false;
    }
    if (!sound) continue;
    return inst;
  }
}

// Environment

MeetingEnv::MeetingEnv(MeetingInstance instance)
    : instance_(std::move(instance)) {
  validate(instance_);
}

std::vector<AgentId> MeetingEnv::agents() const {
  return {{kPlanner1, AgentRole::kBoth},
          {kPlanner2, AgentRole::kBoth},
          {kTraveler, AgentRole::kBoth}};
}

PatternSpec MeetingEnv::default_pattern() const {
  return PatternSpec::FixedOrder({kPlanner1, kTraveler, kPlanner2, kTraveler});
}

const PlannerProfile& MeetingEnv::planner(const std::string& agent) const {
  for (const auto& p : instance_.planners) {
    if (p.agent == agent) return p;
  }
  throw ConfigError("meeting has no planner " + agent);
}

namespace {

std::string window_list(const std::vector<TimeWindow>& ws) {
  std::string out;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (i > 0) out += " and ";
    out += format_time(ws[i].start) + " to " + format_time(ws[i].end);
  }
  return out;
}

}  // namespace

std::vector<TokenList> MeetingEnv::constraints(const std::string& agent) const {
  const auto& p = planner(agent);
  const auto& tok = default_tokenizer();
  return {
      tok.tokenize(p.name + " is at " + instance_.locations[p.location] +
                   " and will meet for " + std::to_string(p.duration) +
                   " minutes."),
      tok.tokenize(p.name + " is available " + window_list(p.availability) +
                   "."),
  };
}

TokenList MeetingEnv::filler(const std::string& agent, int turn) const {
  const auto& p = planner(agent);
  std::string text = p.name + " would prefer " + window_list(p.preferred) +
                     ". " + p.preferences + ". ";
  text += words::kFiller[(turn + p.name.size()) % words::kFiller.size()];
  text += ".";
  return default_tokenizer().tokenize(text);
}

int MeetingEnv::constraints_delivered(const std::string& agent,
                                      const Transcript& history) const {
  const auto cs = constraints(agent);
  int k = 0;
  for (const auto& m : history.turns) {
    if (m.author != agent || k >= static_cast<int>(cs.size())) continue;
    const auto delivered = m.delivered_tokens();
    const auto& c = cs[k];
    if (delivered.size() >= c.size() &&
        std::equal(c.begin(), c.end(), delivered.begin())) {
      ++k;
    }
  }
  return k;
}

StepResult MeetingEnv::step(const Transcript& t) const {
  if (t.turns.empty()) return StepResult::Continue();
  const auto& last = t.turns.back();
  if (last.author != kTraveler) return StepResult::Continue();
  const auto text = join_tokens(last.delivered_tokens());
  if (text.find("Stop!") == std::string::npos) return StepResult::Continue();
  return StepResult::Terminal(verify_schedule_text(instance_, text).value);
}

ChatExchange MeetingEnv::build_exchange(const std::string& agent,
                                        const Transcript& history,
                                        bool concise) const {
  std::string system;
  if (agent == kTraveler) {
    std::string distances;
    for (std::size_t i = 0; i < instance_.locations.size(); ++i) {
      for (std::size_t j = i + 1; j < instance_.locations.size(); ++j) {
        distances += instance_.locations[i] + " to " + instance_.locations[j] +
                     ": " + std::to_string(instance_.travel_minutes[i][j]) +
                     " minutes\n";
      }
    }
    system = PromptTemplate::from_asset("traveler").render(
        {{"start_location", instance_.locations[instance_.traveler.start_location]},
         {"departure", format_time(instance_.traveler.departure)},
         {"distances", distances}});
  } else {
    const auto& p = planner(agent);
    system = PromptTemplate::from_asset("planner").render(
        {{"name", p.name},
         {"location", instance_.locations[p.location]},
         {"duration", std::to_string(p.duration)},
         {"availability", window_list(p.availability)},
         {"preferred", window_list(p.preferred)}});
    system += "\n" + p.preferences;
  }
  if (concise) system = concise_instruction() + "\n" + system;
  return history_exchange(agent, system, history);
}

std::string MeetingEnv::scripted_message(const std::string& agent,
                                         const Transcript& history) const {
  if (agent == kTraveler) {
    bool all = true;
    for (const auto& p : instance_.planners) {
      all = all && constraints_delivered(p.agent, history) ==
                       static_cast<int>(constraints(p.agent).size());
    }
    if (all) return format_schedule(instance_.gold);
    return "Thanks, noted. Please share your next constraint.";
  }
  const auto cs = constraints(agent);
  const int k = constraints_delivered(agent, history);
  int turn = 0;
  for (const auto& m : history.turns) turn += m.author == agent;
  TokenList out;
  if (k < static_cast<int>(cs.size())) {
    out = cs[k];
  } else {
    out = default_tokenizer().tokenize("Nothing new from " + planner(agent).name +
                                       ".");
  }
  const auto f = filler(agent, turn);
  out.insert(out.end(), f.begin(), f.end());
  return join_tokens(out);
}

bool MeetingEnv::key_delivered(const PolicyContext& ctx) const {
  if (ctx.listener != kTraveler ||
      (ctx.speaker != kPlanner1 && ctx.speaker != kPlanner2)) {
    return false;
  }
  const std::string speaker(ctx.speaker);
  const auto cs = constraints(speaker);
  const int k = constraints_delivered(speaker, ctx.history);
  if (k >= static_cast<int>(cs.size())) return true;
  const TokenList prefix = flatten(ctx.current_chunks);
  return prefix.size() >= cs[k].size();
}

}  // namespace intercomm
