#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "nmsoc/netlist.hpp"
#include "nmsoc/network.hpp"
#include "nmsoc/topology.hpp"

namespace nmsoc::compiler {

struct Placement {
    std::vector<NeuronRef> location; // per network neuron: core node and local index
    std::map<CoreId, std::uint32_t> load;
    std::map<CoreId, std::size_t> group_of; // parameter class of each used core

    std::vector<CoreId> cores_used() const;
};

/// Connections whose two ends sit on different cores.
std::size_t inter_core_edges(const NetworkDescription& net, const Placement& placement);

struct PlacementOptions {
    std::uint32_t neurons_per_core = 256;
    bool improve = true;
};

/// Consecutive layers sharing threshold, leak and reset form a group (input
/// layers join any group); each group is spread evenly over
/// ceil(size / capacity) cores taken in id order. A local pass then swaps
/// equal-sized neuron blocks between cores of a group whenever that strictly
/// lowers inter_core_edges. Throws PlacementError when cores run out.
Placement place(const NetworkDescription& net, const topology::TopologyGraph& topology,
    const PlacementOptions& options = {});

} // namespace nmsoc::compiler
