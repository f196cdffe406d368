#pragma once

#include <compare>
#include <optional>
#include <vector>

#include "byzset/index_set.hpp"

namespace byzset {

/// Source-routing header of a relayed copy. `path` lists the nodes the copy
/// has traversed so far, starting at the origin and ending at its sender.
struct RelayHeader {
  AgentId origin = 0;
  AgentId destination = 0;
  std::vector<AgentId> path;
  friend bool operator==(const RelayHeader&, const RelayHeader&) = default;
  friend auto operator<=>(const RelayHeader&, const RelayHeader&) = default;
};

/// One point-to-point message. Sender identity is fixed by the channel.
struct Message {
  AgentId from = 0;
  AgentId to = 0;
  ValueSet payload;
  std::optional<RelayHeader> relay;
  friend bool operator==(const Message&, const Message&) = default;
};

}  // namespace byzset
