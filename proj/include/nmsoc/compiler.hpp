#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "nmsoc/netlist.hpp"
#include "nmsoc/network.hpp"
#include "nmsoc/placement.hpp"
#include "nmsoc/quantize.hpp"
#include "nmsoc/routing.hpp"
#include "nmsoc/spike_trace.hpp"
#include "nmsoc/topology.hpp"

namespace nmsoc::compiler {

struct CompileOptions {
    int weight_count = 16; // N
    int weight_width = 8;  // W
    std::uint32_t neurons_per_core = 256;
    int mp_bits = 16;
    int output_buffer = 0; // buffer receiving the last layer
    bool improve_placement = true;
};

struct CompiledNetwork {
    Netlist netlist;
    Placement placement;
    RoutingProgram routing;
    std::map<CoreId, LloydMaxResult> quantization;
};

/// Places, quantizes per core and routes `net` on `topology`, producing a
/// netlist. Parallel connections between the same pair of neurons are summed.
CompiledNetwork compile(const NetworkDescription& net, const topology::TopologyGraph& topology,
    const CompileOptions& options = {});

/// Network-level input spikes in fabric coordinates.
std::vector<Spike> map_spikes(const Placement& placement, std::span<const NeuronSpike> spikes);

} // namespace nmsoc::compiler
