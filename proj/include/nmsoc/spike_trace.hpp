#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nmsoc/common.hpp"

namespace nmsoc {

/// One spike of neuron `neuron` on core `core` (a topology node id).
struct Spike {
    std::uint32_t timestep = 0;
    CoreId core = 0;
    std::uint32_t neuron = 0;

    auto operator<=>(const Spike&) const = default;
};

/// CSV with header `timestep,core,neuron`.
std::vector<Spike> read_spike_trace(std::istream& in, const std::string& source = "<trace>");
std::vector<Spike> load_spike_trace(const std::filesystem::path& path);
void write_spike_trace(std::ostream& out, const std::vector<Spike>& spikes);
void save_spike_trace(const std::filesystem::path& path, const std::vector<Spike>& spikes);

} // namespace nmsoc
