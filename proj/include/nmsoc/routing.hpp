#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "nmsoc/netlist.hpp"
#include "nmsoc/topology.hpp"

namespace nmsoc::compiler {

struct RoutingProgram {
    std::vector<NetlistRoute> routes;
    std::vector<NetlistRelay> relays;
    std::map<std::pair<CoreId, CoreId>, std::vector<NodeId>> paths; // (source, destination) -> nodes
};

/// Shortest path from `from` to `to`, stepping each time to the lowest-id
/// neighbor that is one hop closer.
std::vector<NodeId> shortest_path(const topology::TopologyGraph& g, NodeId from, NodeId to);

/// Routes every (source core -> destination cores) flow along shortest paths.
/// Each router row (input core) lists the next cores of all flows entering
/// through it: several cells form a Broadcast row; a single cell is Merge
/// when another row of the router targets the same core, else P2P.
/// Throws RoutingError naming the router if a matrix would exceed 25 cells.
RoutingProgram synthesize_routes(const std::map<CoreId, std::set<CoreId>>& flows,
    const topology::TopologyGraph& topology);

} // namespace nmsoc::compiler
