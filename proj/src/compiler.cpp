#include "nmsoc/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace nmsoc::compiler {

CompiledNetwork compile(const NetworkDescription& net, const topology::TopologyGraph& topology,
    const CompileOptions& o)
{
    if (!core::supported_codebook_parameter(o.weight_count) || !core::supported_codebook_parameter(o.weight_width)) {
        throw std::invalid_argument("N and W must be 4, 8 or 16");
    }
    if (o.output_buffer < 0 || o.output_buffer > 3) {
        throw std::invalid_argument("output buffer must be 0..3");
    }
    validate(net);
    CompiledNetwork out;
    out.placement = place(net, topology, PlacementOptions{o.neurons_per_core, o.improve_placement});
    const auto& loc = out.placement.location;
    const auto range = core::MpRange::of_bits(o.mp_bits);

    std::map<std::pair<std::uint32_t, std::uint32_t>, double> merged;
    for (const auto& c : net.connections) {
        merged[{c.pre, c.post}] += c.weight;
    }

    // Parameter class of each core: its first non-input neuron's layer.
    std::map<CoreId, const Layer*> layer_of_core;
    for (std::uint32_t n = 0; n < net.neuron_count(); ++n) {
        const auto& l = net.layers[net.layer_of(n)];
        auto& slot = layer_of_core[loc[n].core];
        if (slot == nullptr || (slot->input && !l.input)) {
            slot = &l;
        }
    }

    Netlist& nl = out.netlist;
    nl.neurons_per_core = o.neurons_per_core;
    std::map<CoreId, std::vector<std::pair<std::uint32_t, std::uint32_t>>> conns_of;
    for (const auto& [edge, w] : merged) {
        conns_of[loc[edge.second].core].push_back(edge);
    }

    for (const auto& [core_id, load] : out.placement.load) {
        if (load == 0) {
            continue;
        }
        const Layer& l = *layer_of_core.at(core_id);
        NetlistCore c;
        c.id = core_id;
        c.weight_count = o.weight_count;
        c.weight_width = o.weight_width;
        c.reset = l.reset;
        c.neurons = load;

        const double limit = std::max(std::abs(l.threshold), l.leak);
        const double max_scale = limit > 0 ? 0.5 * range.max / limit : 1e300;
        const auto& edges = conns_of[core_id];
        std::vector<double> weights;
        for (const auto& e : edges) {
            weights.push_back(merged.at(e));
        }
        if (weights.empty()) {
            c.codebook.assign(static_cast<std::size_t>(o.weight_count), 0);
            c.scale = limit > 0 ? std::min(1.0, max_scale) : 1.0;
        } else {
            auto q = quantize_codebook(weights, o.weight_count, o.weight_width, max_scale);
            c.codebook = q.codebook.values();
            c.scale = q.scale;
            for (std::size_t i = 0; i < edges.size(); ++i) {
                const auto [pre, post] = edges[i];
                nl.synapses.push_back(NetlistSynapse{core_id, loc[pre].core, loc[pre].neuron, loc[post].neuron,
                    q.indexes[i]});
            }
            out.quantization.emplace(core_id, std::move(q.report));
        }
        const double t = std::round(l.threshold * c.scale);
        c.threshold = static_cast<std::int32_t>(std::clamp<double>(l.threshold > 0 ? std::max(1.0, t) : t, range.min, range.max));
        c.leak = static_cast<std::int32_t>(std::clamp<double>(std::round(l.leak * c.scale), 0, range.max));
        nl.cores.push_back(c);
    }
    std::sort(nl.synapses.begin(), nl.synapses.end());

    for (std::uint32_t n = 0; n < net.neuron_count(); ++n) {
        if (net.is_input(n)) {
            nl.inputs.push_back(loc[n]);
        }
    }
    if (!net.layers.empty()) {
        const auto last = net.layers.size() - 1;
        const auto first = net.first_neuron(last);
        if (net.layers[last].count > (1u << 13)) {
            throw std::invalid_argument("output layer exceeds the 13-bit output id");
        }
        for (std::uint32_t i = 0; i < net.layers[last].count; ++i) {
            const auto& ref = loc[first + i];
            nl.outputs.push_back(NetlistOutput{ref.core, ref.neuron, o.output_buffer, i});
        }
    }

    std::map<CoreId, std::set<CoreId>> flows;
    for (const auto& s : nl.synapses) {
        if (s.pre_core != s.core) {
            flows[s.pre_core].insert(s.core);
        }
    }
    out.routing = synthesize_routes(flows, topology);
    nl.routes = out.routing.routes;
    nl.relays = out.routing.relays;
    return out;
}

std::vector<Spike> map_spikes(const Placement& placement, std::span<const NeuronSpike> spikes)
{
    std::vector<Spike> out;
    out.reserve(spikes.size());
    for (const auto& s : spikes) {
        const auto& ref = placement.location.at(s.neuron);
        out.push_back(Spike{s.timestep, ref.core, ref.neuron});
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace nmsoc::compiler
