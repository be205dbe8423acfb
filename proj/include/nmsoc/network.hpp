#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nmsoc/core.hpp"
#include "nmsoc/rng.hpp"

namespace nmsoc::compiler {

struct Layer {
    std::uint32_t count = 0;
    double threshold = 1.0;
    double leak = 0.0;
    core::ResetMode reset = core::ResetMode::ToZero;
    bool input = false;

    bool operator==(const Layer&) const = default;
};

/// Neurons are numbered consecutively across layers in declaration order.
struct Connection {
    std::uint32_t pre = 0;
    std::uint32_t post = 0;
    double weight = 0.0;

    bool operator==(const Connection&) const = default;
};

struct NetworkDescription {
    std::vector<Layer> layers;
    std::vector<Connection> connections;

    std::uint32_t neuron_count() const;
    std::uint32_t first_neuron(std::size_t layer) const;
    std::size_t layer_of(std::uint32_t neuron) const;
    bool is_input(std::uint32_t neuron) const { return layers[layer_of(neuron)].input; }

    bool operator==(const NetworkDescription&) const = default;
};

/// A spike of a network neuron (global numbering).
struct NeuronSpike {
    std::uint32_t timestep = 0;
    std::uint32_t neuron = 0;

    auto operator<=>(const NeuronSpike&) const = default;
};

/// Throws std::invalid_argument on out-of-range neurons, connections into
/// input neurons, non-finite weights or negative leak.
void validate(const NetworkDescription& net);

/// Line format: `layer <count> <threshold> <leak> <zero|sub> [input]` and
/// `conn <pre> <post> <weight>`; `#` starts a comment.
NetworkDescription parse_network(std::string_view text, const std::string& source = "<network>");
NetworkDescription load_network(const std::filesystem::path& path);
std::string emit_network(const NetworkDescription& net);

struct RandomNetworkOptions {
    std::uint32_t min_neurons = 64;
    std::uint32_t max_neurons = 256;
    int layers = 3;
    double connection_probability = 0.25;
};

/// Random feedforward network: an input layer, then hidden and output layers
/// sharing one (threshold, leak, reset) class, dense-random connections
/// between consecutive layers.
NetworkDescription random_network(Rng& rng, const RandomNetworkOptions& options = {});

/// Bernoulli input spikes for every input neuron at every timestep.
std::vector<NeuronSpike> random_input_spikes(const NetworkDescription& net, std::uint32_t timesteps, double rate,
    Rng& rng);

} // namespace nmsoc::compiler
