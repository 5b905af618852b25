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

// Meeting scheduling: two planners each represent a participant with a
// fixed location, meeting length and availability; a traveler must meet
// both, driving between locations. The traveler ends the game with a
// schedule block:
//
//   Stop!
//   Tina - Alice, 9:40 – 10:25, at Nob Hill.
//   Tina - Bob, 10:50 – 11:50, at Castro.
//
// Times are minutes from midnight throughout.

#ifndef INTERCOMM_MEETING_H_
#define INTERCOMM_MEETING_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intercomm/environment.h"

namespace intercomm {

struct TimeWindow {
  int start = 0;
  int end = 0;
  bool contains(int s, int e) const { return start <= s && e <= end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct PlannerProfile {
  std::string agent;  // planner1 / planner2
  std::string name;
  std::string role;
  int location = 0;   // index into MeetingInstance::locations
  int duration = 30;
  std::vector<TimeWindow> availability;
  std::vector<TimeWindow> preferred;
  std::string preferences;  // prompt-only
  friend bool operator==(const PlannerProfile&, const PlannerProfile&) = default;
};

struct TravelerProfile {
  std::string name;
  int start_location = 0;
  int departure = 540;
  friend bool operator==(const TravelerProfile&,
                         const TravelerProfile&) = default;
};

struct ScheduledMeeting {
  std::string participant;
  std::string location;
  int start = 0;
  int end = 0;
  friend bool operator==(const ScheduledMeeting&,
                         const ScheduledMeeting&) = default;
};

struct Schedule {
  std::string traveler;
  std::vector<ScheduledMeeting> meetings;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct MeetingInstance {
  std::string id;
  std::vector<std::string> locations;
  std::vector<std::vector<int>> travel_minutes;
  std::vector<PlannerProfile> planners;  // exactly two
  TravelerProfile traveler;
  Schedule gold;

  int travel(int a, int b) const { return travel_minutes.at(a).at(b); }
  int location_index(const std::string& name) const;  // -1 if unknown
  friend bool operator==(const MeetingInstance&,
                         const MeetingInstance&) = default;
};

/// Structural invariants: symmetric matrix, zero diagonal, positive
/// off-diagonal, well-ordered windows, two planners. Throws StructuralError.
void validate(const MeetingInstance& instance);

MeetingInstance gen_meeting_instance(std::uint64_t seed);

/// "9:05" style.
std::string format_time(int minutes);
std::optional<int> parse_time(std::string_view text);

std::string format_schedule(const Schedule& schedule);

/// Parses the meeting lines after the "Stop!" sentinel. Accepts "-" or "–"
/// between times and any whitespace between fields, so space-joined token
/// text parses the same as the original lines. nullopt when the sentinel
/// is missing.
std::optional<Schedule> parse_schedule(std::string_view text);

struct VerifyResult {
  bool ok = false;
  std::string reason;  // first violated constraint, empty when ok
};

VerifyResult check_schedule(const MeetingInstance& instance,
                            const Schedule& schedule);

/// 1 when every hard constraint holds, else 0.
Reward verify_schedule(const MeetingInstance& instance,
                       const Schedule& schedule);

/// Parses then verifies; unparseable text scores 0.
Reward verify_schedule_text(const MeetingInstance& instance,
                            std::string_view text);

enum class ScheduleMutation { kAvailabilityShift, kTravelGap, kExtraMeeting };

/// Gold schedule with one constraint-targeted edit.
Schedule mutate_schedule(const MeetingInstance& instance,
                         ScheduleMutation mutation);

class MeetingEnv final : public Environment {
 public:
  static constexpr const char* kPlanner1 = "planner1";
  static constexpr const char* kPlanner2 = "planner2";
  static constexpr const char* kTraveler = "traveler";

  explicit MeetingEnv(MeetingInstance instance);

  std::string task_name() const override { return "meeting"; }
  std::vector<AgentId> agents() const override;
  PatternSpec default_pattern() const override;
  std::string interruptor() const override { return kTraveler; }
  StepResult step(const Transcript& transcript) const override;
  ChatExchange build_exchange(const std::string& agent,
                              const Transcript& history,
                              bool concise) const override;
  std::string scripted_message(const std::string& agent,
                               const Transcript& history) const override;
  bool key_delivered(const PolicyContext& context) const override;

  const MeetingInstance& instance() const { return instance_; }

  /// The constraint sentences a planner must get across, in order.
  std::vector<TokenList> constraints(const std::string& planner) const;

  /// How many of `planner`'s constraints have been fully delivered.
  int constraints_delivered(const std::string& planner,
                            const Transcript& history) const;

 private:
  const PlannerProfile& planner(const std::string& agent) const;
  TokenList filler(const std::string& planner, int turn) const;

  MeetingInstance instance_;
};

}  // namespace intercomm

#endif  // INTERCOMM_MEETING_H_
