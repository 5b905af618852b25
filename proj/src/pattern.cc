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

#include "intercomm/pattern.h"

#include <algorithm>
#include <set>

#include "intercomm/error.h"

namespace intercomm {

PatternSpec PatternSpec::FixedOrder(std::vector<std::string> order,
                                    bool cycles) {
  return PatternSpec{PatternKind::kFixedOrder, std::move(order), cycles};
}

PatternSpec PatternSpec::Broadcast(std::string speaker,
                                   std::vector<std::string> listeners) {
  std::vector<std::string> agents{std::move(speaker)};
  agents.insert(agents.end(), listeners.begin(), listeners.end());
  return PatternSpec{PatternKind::kBroadcast, std::move(agents), true};
}

PatternSpec PatternSpec::Mutual(std::string a, std::string b) {
  return PatternSpec{PatternKind::kMutual, {std::move(a), std::move(b)}, true};
}

PatternSpec PatternSpec::GroupChat(std::vector<std::string> members) {
  return PatternSpec{PatternKind::kGroupChat, std::move(members), true};
}

void validate(const PatternSpec& p) {
  if (p.agents.size() < 2) {
    throw StructuralError(to_string(p.kind) + " pattern needs two agents");
  }
  for (const auto& a : p.agents) {
    if (a.empty()) throw StructuralError("empty agent name in pattern");
  }
  switch (p.kind) {
    case PatternKind::kFixedOrder: {
      const auto k = p.agents.size();
      for (std::size_t i = 0; i + 1 < k; ++i) {
        if (p.agents[i] == p.agents[i + 1]) {
          throw StructuralError("fixed order would speak to itself: " +
                                p.agents[i]);
        }
      }
      if (p.cycles && p.agents.back() == p.agents.front()) {
        throw StructuralError("fixed order would speak to itself: " +
                              p.agents.front());
      }
      if (pattern_members(p).size() < 2) {
        throw StructuralError("fixed order needs two distinct agents");
      }
      break;
    }
    case PatternKind::kBroadcast:
    case PatternKind::kGroupChat:
    case PatternKind::kMutual: {
      std::set<std::string> seen(p.agents.begin(), p.agents.end());
      if (seen.size() != p.agents.size()) {
        throw StructuralError(to_string(p.kind) +
                              " pattern lists an agent twice");
      }
      if (p.kind == PatternKind::kMutual && p.agents.size() != 2) {
        throw StructuralError("mutual pattern takes exactly two agents");
      }
      break;
    }
  }
}

std::vector<std::string> ChannelGroup::listeners() const {
  std::vector<std::string> out;
  out.reserve(channels.size());
  for (const auto& c : channels) out.push_back(c.listener);
  return out;
}

std::vector<ChannelGroup> decompose(const PatternSpec& p, int chunk_size) {
  validate(p);
  if (chunk_size < 1) throw StructuralError("chunk_size must be >= 1");
  std::vector<ChannelGroup> out;
  const auto& a = p.agents;
  const auto k = a.size();
  switch (p.kind) {
    case PatternKind::kFixedOrder:
    case PatternKind::kMutual: {
      const bool cycles = p.kind == PatternKind::kMutual || p.cycles;
      const std::size_t slots = cycles ? k : k - 1;
      for (std::size_t i = 0; i < slots; ++i) {
        out.push_back({{Channel{a[i], a[(i + 1) % k], chunk_size}}, false});
      }
      break;
    }
    case PatternKind::kBroadcast: {
      ChannelGroup g{{}, true};
      for (std::size_t i = 1; i < k; ++i) {
        g.channels.push_back(Channel{a[0], a[i], chunk_size});
      }
      out.push_back(std::move(g));
      break;
    }
    case PatternKind::kGroupChat: {
      for (std::size_t s = 0; s < k; ++s) {
        ChannelGroup g{{}, true};
        for (std::size_t j = 1; j < k; ++j) {
          g.channels.push_back(Channel{a[s], a[(s + j) % k], chunk_size});
        }
        out.push_back(std::move(g));
      }
      break;
    }
  }
  return out;
}

std::vector<Channel> flatten(const std::vector<ChannelGroup>& groups) {
  std::vector<Channel> out;
  for (const auto& g : groups) {
    out.insert(out.end(), g.channels.begin(), g.channels.end());
  }
  return out;
}

std::vector<std::string> pattern_members(const PatternSpec& p) {
  std::vector<std::string> out;
  for (const auto& a : p.agents) {
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  return out;
}

std::string to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::kFixedOrder: return "fixed";
    case PatternKind::kBroadcast: return "broadcast";
    case PatternKind::kMutual: return "mutual";
    case PatternKind::kGroupChat: return "group";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& v, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < v.size(); ++i) {
    if (i > from) out += ',';
    out += v[i];
  }
  return out;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string to_string(const PatternSpec& p) {
  switch (p.kind) {
    case PatternKind::kFixedOrder:
      return (p.cycles ? "fixed:" : "chain:") + join(p.agents, 0);
    case PatternKind::kBroadcast:
      return "broadcast:" + p.agents.front() + ">" + join(p.agents, 1);
    case PatternKind::kMutual:
      return "mutual:" + join(p.agents, 0);
    case PatternKind::kGroupChat:
      return "group:" + join(p.agents, 0);
  }
  return {};
}

PatternSpec parse_pattern(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("pattern needs a kind prefix: " + text);
  }
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  PatternSpec p;
  if (kind == "fixed" || kind == "chain") {
    p = PatternSpec::FixedOrder(split_names(rest), kind == "fixed");
  } else if (kind == "mutual") {
    auto names = split_names(rest);
    if (names.size() != 2) throw ConfigError("mutual pattern takes two agents");
    p = PatternSpec::Mutual(names[0], names[1]);
  } else if (kind == "group") {
    p = PatternSpec::GroupChat(split_names(rest));
  } else if (kind == "broadcast") {
    const auto gt = rest.find('>');
    if (gt == std::string::npos) {
      throw ConfigError("broadcast pattern is speaker>listener,...");
    }
    p = PatternSpec::Broadcast(rest.substr(0, gt),
                               split_names(rest.substr(gt + 1)));
  } else {
    throw ConfigError("unknown pattern kind: " + kind);
  }
  try {
    validate(p);
  } catch (const StructuralError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

}  // namespace intercomm
