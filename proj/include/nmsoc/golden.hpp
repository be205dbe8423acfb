#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmsoc/core.hpp"
#include "nmsoc/netlist.hpp"
#include "nmsoc/network.hpp"
#include "nmsoc/spike_trace.hpp"

namespace nmsoc::compiler {

/// Sequential reference for a mapped network, in integer arithmetic. At
/// timestep t a neuron integrates the spikes of input neurons at t and of
/// other neurons at t - 1. Returns all non-input spikes, sorted.
std::vector<Spike> golden_eval(const Netlist& netlist, std::span<const Spike> inputs, std::uint32_t timesteps,
    core::MpRange range);

/// Real-valued reference for an unquantized network, same timing semantics,
/// without saturation.
std::vector<NeuronSpike> golden_eval(const NetworkDescription& net, std::span<const NeuronSpike> inputs,
    std::uint32_t timesteps);

} // namespace nmsoc::compiler
