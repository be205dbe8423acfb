#include "nmsoc/golden.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

namespace nmsoc::compiler {

std::vector<Spike> golden_eval(const Netlist& netlist, std::span<const Spike> inputs, std::uint32_t timesteps,
    core::MpRange range)
{
    std::map<NeuronRef, std::int32_t> mp;
    for (const auto& c : netlist.cores) {
        for (std::uint32_t n = 0; n < c.neurons; ++n) {
            mp[NeuronRef{c.id, n}] = 0;
        }
    }
    const std::set<NeuronRef> input_set(netlist.inputs.begin(), netlist.inputs.end());
    std::set<NeuronRef> previous; // non-input spikes of t - 1
    std::vector<Spike> out;

    for (std::uint32_t t = 0; t < timesteps; ++t) {
        std::set<NeuronRef> active = previous;
        for (const auto& s : inputs) {
            if (s.timestep == t && input_set.contains(NeuronRef{s.core, s.neuron})) {
                active.insert(NeuronRef{s.core, s.neuron});
            }
        }
        std::map<NeuronRef, std::int64_t> sum;
        for (const auto& syn : netlist.synapses) {
            if (active.contains(NeuronRef{syn.pre_core, syn.pre_neuron})) {
                const auto* c = netlist.find_core(syn.core);
                sum[NeuronRef{syn.core, syn.post}] += c->codebook[syn.index];
            }
        }
        std::set<NeuronRef> fired;
        for (const auto& c : netlist.cores) {
            core::CoreRegisterTable params;
            params.threshold = c.threshold;
            params.leak = c.leak;
            params.reset_mode = c.reset;
            for (std::uint32_t n = 0; n < c.neurons; ++n) {
                const NeuronRef ref{c.id, n};
                if (input_set.contains(ref)) {
                    continue;
                }
                std::optional<std::int64_t> contribution;
                if (auto it = sum.find(ref); it != sum.end()) {
                    contribution = it->second;
                }
                auto r = core::neuron_update(core::NeuronState{mp[ref], false}, contribution, params, range);
                mp[ref] = r.state.mp;
                if (r.fired) {
                    fired.insert(ref);
                    out.push_back(Spike{t, c.id, n});
                }
            }
        }
        previous = std::move(fired);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NeuronSpike> golden_eval(const NetworkDescription& net, std::span<const NeuronSpike> inputs,
    std::uint32_t timesteps)
{
    const auto n = net.neuron_count();
    std::vector<double> mp(n, 0.0);
    std::vector<bool> is_input(n);
    std::vector<std::size_t> layer(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        layer[i] = net.layer_of(i);
        is_input[i] = net.layers[layer[i]].input;
    }
    std::vector<bool> previous(n, false);
    std::vector<NeuronSpike> out;
    for (std::uint32_t t = 0; t < timesteps; ++t) {
        std::vector<bool> active = previous;
        for (const auto& s : inputs) {
            if (s.timestep == t && s.neuron < n && is_input[s.neuron]) {
                active[s.neuron] = true;
            }
        }
        std::vector<double> sum(n, 0.0);
        for (const auto& c : net.connections) {
            if (active[c.pre]) {
                sum[c.post] += c.weight;
            }
        }
        std::vector<bool> fired(n, false);
        for (std::uint32_t i = 0; i < n; ++i) {
            if (is_input[i]) {
                continue;
            }
            const auto& l = net.layers[layer[i]];
            mp[i] += sum[i];
            mp[i] -= l.leak;
            if (mp[i] >= l.threshold) {
                fired[i] = true;
                mp[i] = l.reset == core::ResetMode::ToZero ? 0.0 : mp[i] - l.threshold;
                out.push_back(NeuronSpike{t, i});
            }
        }
        previous = std::move(fired);
    }
    return out;
}

} // namespace nmsoc::compiler
