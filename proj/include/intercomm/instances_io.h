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

// Task instances on disk and the task registry.
//
// Instance files are JSONL, one instance per line:
//   {"schema_version": 1, "task": "meeting", "instance": {...}}

#ifndef INTERCOMM_INSTANCES_IO_H_
#define INTERCOMM_INSTANCES_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "intercomm/debate.h"
#include "intercomm/json_fwd.h"
#include "intercomm/meeting.h"
#include "intercomm/pictionary.h"
#include "intercomm/relay.h"

namespace intercomm {

inline constexpr int kInstanceSchemaVersion = 1;

using AnyInstance =
    std::variant<PictionaryInstance, MeetingInstance, DebateInstance,
                 RelayInstance>;

/// Free-form task.* options from a config file or the command line.
using TaskOptions = std::map<std::string, std::string>;

const std::vector<std::string>& task_names();

std::string task_of(const AnyInstance& instance);
std::string instance_id(const AnyInstance& instance);

/// Generates one instance. Unknown or malformed options throw ConfigError.
AnyInstance gen_instance(const std::string& task, std::uint64_t seed,
                         const TaskOptions& options = {});

std::unique_ptr<Environment> make_environment(const AnyInstance& instance,
                                              const TaskOptions& options = {});

ordered_json instance_to_json(const AnyInstance& instance);
AnyInstance instance_from_json(const ordered_json& j);

void write_instances(std::ostream& out, const std::vector<AnyInstance>& list);
std::vector<AnyInstance> read_instances(std::istream& in);
std::vector<AnyInstance> read_instances(const std::filesystem::path& path);

ordered_json schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const ordered_json& j);

}  // namespace intercomm

#endif  // INTERCOMM_INSTANCES_IO_H_
