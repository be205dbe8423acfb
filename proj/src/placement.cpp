#include "nmsoc/placement.hpp"

#include <algorithm>
#include <tuple>

namespace nmsoc::compiler {
namespace {

struct Group {
    std::vector<std::uint32_t> neurons;
    std::vector<CoreId> cores;
};

bool same_class(const Layer& a, const Layer& b)
{
    return a.threshold == b.threshold && a.leak == b.leak && a.reset == b.reset;
}

std::vector<Group> group_layers(const NetworkDescription& net)
{
    std::vector<Group> groups;
    const Layer* cls = nullptr;
    std::uint32_t next = 0;
    for (const auto& l : net.layers) {
        if (groups.empty()) {
            groups.emplace_back();
            cls = l.input ? nullptr : &l;
        } else if (!l.input) {
            if (cls == nullptr) {
                cls = &l;
            } else if (!same_class(*cls, l)) {
                groups.emplace_back();
                cls = &l;
            }
        }
        for (std::uint32_t i = 0; i < l.count; ++i) {
            groups.back().neurons.push_back(next++);
        }
    }
    return groups;
}

} // namespace

std::vector<CoreId> Placement::cores_used() const
{
    std::vector<CoreId> used;
    for (const auto& [core, n] : load) {
        if (n > 0) {
            used.push_back(core);
        }
    }
    return used;
}

std::size_t inter_core_edges(const NetworkDescription& net, const Placement& p)
{
    std::size_t n = 0;
    for (const auto& c : net.connections) {
        n += p.location[c.pre].core != p.location[c.post].core;
    }
    return n;
}

Placement place(const NetworkDescription& net, const topology::TopologyGraph& topology, const PlacementOptions& o)
{
    if (o.neurons_per_core == 0) {
        throw std::invalid_argument("neurons_per_core must be positive");
    }
    validate(net);
    const auto cores = topology.nodes_of_kind(topology::NodeKind::Core);
    auto groups = group_layers(net);

    std::size_t needed = 0;
    for (const auto& g : groups) {
        needed += (g.neurons.size() + o.neurons_per_core - 1) / o.neurons_per_core;
    }
    if (needed > cores.size()) {
        const auto total = net.neuron_count();
        const auto capacity = static_cast<std::uint64_t>(cores.size()) * o.neurons_per_core;
        throw PlacementError("placement needs " + std::to_string(needed) + " cores but the fabric has " +
            std::to_string(cores.size()) + " (deficit " + std::to_string(needed - cores.size()) + " cores; " +
            std::to_string(total) + " neurons against a capacity of " + std::to_string(capacity) + ")");
    }

    Placement p;
    p.location.resize(net.neuron_count());
    std::size_t next_core = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        auto& g = groups[gi];
        const auto k = (g.neurons.size() + o.neurons_per_core - 1) / o.neurons_per_core;
        const auto base = g.neurons.size() / std::max<std::size_t>(k, 1);
        const auto extra = g.neurons.size() % std::max<std::size_t>(k, 1);
        std::size_t pos = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const CoreId core = cores[next_core++];
            g.cores.push_back(core);
            p.group_of[core] = gi;
            const auto take = base + (j < extra ? 1 : 0);
            for (std::uint32_t local = 0; local < take; ++local) {
                p.location[g.neurons[pos++]] = NeuronRef{core, local};
            }
            p.load[core] = static_cast<std::uint32_t>(take);
        }
    }
    if (!o.improve) {
        return p;
    }

    std::vector<std::vector<std::uint32_t>> incident(net.neuron_count());
    for (std::uint32_t i = 0; i < net.connections.size(); ++i) {
        incident[net.connections[i].pre].push_back(i);
        incident[net.connections[i].post].push_back(i);
    }
    auto cut = [&](std::uint32_t conn) {
        const auto& c = net.connections[conn];
        return p.location[c.pre].core != p.location[c.post].core ? 1 : 0;
    };

    for (auto& g : groups) {
        if (g.cores.size() < 2) {
            continue;
        }
        // Blocks are runs of consecutive local slots on one core.
        const std::size_t block = std::max<std::size_t>(1, (g.neurons.size() + 63) / 64);
        std::vector<std::vector<std::uint32_t>> by_core(g.cores.size());
        for (auto n : g.neurons) {
            const auto idx = static_cast<std::size_t>(
                std::find(g.cores.begin(), g.cores.end(), p.location[n].core) - g.cores.begin());
            by_core[idx].push_back(n);
        }
        for (auto& list : by_core) {
            std::sort(list.begin(), list.end(),
                [&](std::uint32_t a, std::uint32_t b) { return p.location[a].neuron < p.location[b].neuron; });
        }
        struct Block {
            std::size_t core;
            std::size_t first;
            std::size_t size;
        };
        std::vector<Block> blocks;
        for (std::size_t c = 0; c < by_core.size(); ++c) {
            for (std::size_t f = 0; f < by_core[c].size(); f += block) {
                blocks.push_back(Block{c, f, std::min(block, by_core[c].size() - f)});
            }
        }
        auto swap_blocks = [&](const Block& a, const Block& b) {
            for (std::size_t i = 0; i < a.size; ++i) {
                auto& x = by_core[a.core][a.first + i];
                auto& y = by_core[b.core][b.first + i];
                std::swap(p.location[x], p.location[y]);
                std::swap(x, y);
            }
        };
        auto local_cut = [&](const Block& a, const Block& b) {
            std::vector<std::uint32_t> conns;
            for (const auto* blk : {&a, &b}) {
                for (std::size_t i = 0; i < blk->size; ++i) {
                    const auto& inc = incident[by_core[blk->core][blk->first + i]];
                    conns.insert(conns.end(), inc.begin(), inc.end());
                }
            }
            std::sort(conns.begin(), conns.end());
            conns.erase(std::unique(conns.begin(), conns.end()), conns.end());
            std::size_t total = 0;
            for (auto c : conns) {
                total += static_cast<std::size_t>(cut(c));
            }
            return total;
        };

        for (int pass = 0; pass < 4; ++pass) {
            bool improved = false;
            for (std::size_t i = 0; i < blocks.size(); ++i) {
                for (std::size_t j = i + 1; j < blocks.size(); ++j) {
                    const auto& a = blocks[i];
                    const auto& b = blocks[j];
                    if (a.core == b.core || a.size != b.size) {
                        continue;
                    }
                    const auto before = local_cut(a, b);
                    swap_blocks(a, b);
                    if (local_cut(a, b) < before) {
                        improved = true;
                    } else {
                        swap_blocks(a, b);
                    }
                }
            }
            if (!improved) {
                break;
            }
        }
    }
    return p;
}

} // namespace nmsoc::compiler
