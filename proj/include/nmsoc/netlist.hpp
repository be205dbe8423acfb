#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmsoc/common.hpp"
#include "nmsoc/core.hpp"
#include "nmsoc/router.hpp"

namespace nmsoc {

struct NetlistCore {
    CoreId id = 0;
    int weight_count = 16;
    int weight_width = 8;
    std::int32_t threshold = 1;
    std::int32_t leak = 0;
    core::ResetMode reset = core::ResetMode::ToZero;
    std::uint32_t neurons = 0;
    std::vector<std::int32_t> codebook;
    double scale = 1.0; // integer weight units per real weight unit

    bool operator==(const NetlistCore&) const = default;
};

struct NetlistSynapse {
    CoreId core = 0;
    CoreId pre_core = 0;
    std::uint32_t pre_neuron = 0;
    std::uint32_t post = 0;
    std::uint8_t index = 0;

    auto operator<=>(const NetlistSynapse&) const = default;
};

struct NetlistRoute {
    NodeId router = 0;
    CoreId in_core = 0;
    int slot = 0;
    CoreId dest_core = 0;
    router::TransmissionMode mode = router::TransmissionMode::P2P;

    bool operator==(const NetlistRoute&) const = default;
};

/// Core `core` forwards spikes that originate on `origin` to `router`.
struct NetlistRelay {
    CoreId core = 0;
    CoreId origin = 0;
    NodeId router = 0;

    auto operator<=>(const NetlistRelay&) const = default;
};

struct NeuronRef {
    CoreId core = 0;
    std::uint32_t neuron = 0;

    auto operator<=>(const NeuronRef&) const = default;
};

struct NetlistOutput {
    CoreId core = 0;
    std::uint32_t neuron = 0;
    int buffer = 0;
    std::uint32_t id = 0; // record id inside the output buffer

    auto operator<=>(const NetlistOutput&) const = default;
};

/// A network mapped onto the fabric: per-core parameters and codebooks,
/// synapse indexes, router connection matrices, core relay tables, and the
/// input and output neurons.
struct Netlist {
    std::uint32_t neurons_per_core = 256;
    std::vector<NetlistCore> cores;
    std::vector<NetlistSynapse> synapses;
    std::vector<NetlistRoute> routes;
    std::vector<NetlistRelay> relays;
    std::vector<NeuronRef> inputs;
    std::vector<NetlistOutput> outputs;

    const NetlistCore* find_core(CoreId id) const;
    bool is_input(CoreId core, std::uint32_t neuron) const;

    bool operator==(const Netlist&) const = default;
};

/// Pre-synaptic input lines of `core` in (src_core, src_neuron) order; lines
/// fed by input neurons are immediate.
std::vector<core::InputLine> input_lines(const Netlist& netlist, CoreId core);

/// Dense synapse index image of `core`, [line][neuron], kNoSynapse for absent.
std::vector<std::uint8_t> synapse_image(const Netlist& netlist, CoreId core);

std::string emit_netlist(const Netlist& netlist);
/// Throws ParseError with the offending line on syntax or consistency errors.
Netlist parse_netlist(std::string_view text, const std::string& source = "<netlist>");
Netlist load_netlist(const std::filesystem::path& path);
void save_netlist(const std::filesystem::path& path, const Netlist& netlist);

} // namespace nmsoc
