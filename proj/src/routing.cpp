#include "nmsoc/routing.hpp"

#include <algorithm>

#include "nmsoc/router.hpp"

namespace nmsoc::compiler {

std::vector<NodeId> shortest_path(const topology::TopologyGraph& g, NodeId from, NodeId to)
{
    const auto dist = topology::bfs_distances(g, to);
    if (dist.at(from) == topology::kUnreachable) {
        throw RoutingError("no path from node " + std::to_string(from) + " to node " + std::to_string(to));
    }
    std::vector<NodeId> path{from};
    NodeId at = from;
    while (at != to) {
        for (auto n : g.neighbors(at)) {
            if (dist[n] + 1 == dist[at]) {
                at = n;
                break;
            }
        }
        path.push_back(at);
    }
    return path;
}

RoutingProgram synthesize_routes(const std::map<CoreId, std::set<CoreId>>& flows,
    const topology::TopologyGraph& topology)
{
    using router::TransmissionMode;
    RoutingProgram prog;
    // router -> input core -> next cores
    std::map<NodeId, std::map<CoreId, std::set<CoreId>>> rows;
    std::set<NetlistRelay> relays;

    for (const auto& [src, dests] : flows) {
        for (auto dst : dests) {
            if (dst == src) {
                continue;
            }
            auto path = shortest_path(topology, src, dst);
            for (std::size_t i = 0; i + 2 < path.size(); i += 2) {
                const auto from = path[i];
                const auto via = path[i + 1];
                const auto next = path[i + 2];
                if (topology.kind(via) == topology::NodeKind::Core || topology.kind(from) != topology::NodeKind::Core ||
                    topology.kind(next) != topology::NodeKind::Core) {
                    throw RoutingError("path from core " + std::to_string(src) + " to core " + std::to_string(dst) +
                        " does not alternate cores and routers");
                }
                rows[via][from].insert(next);
                relays.insert(NetlistRelay{from, src, via});
            }
            prog.paths[{src, dst}] = std::move(path);
        }
    }

    for (const auto& [router, by_input] : rows) {
        std::size_t cells = 0;
        std::map<CoreId, int> targeted;
        for (const auto& [in, outs] : by_input) {
            cells += outs.size();
            for (auto o : outs) {
                ++targeted[o];
            }
        }
        if (cells > static_cast<std::size_t>(router::ConnectionMatrix::kRows * router::ConnectionMatrix::kSlots)) {
            throw RoutingError("router " + std::to_string(router) + " needs " + std::to_string(cells) +
                " matrix cells, budget is 25");
        }
        for (const auto& [in, outs] : by_input) {
            if (outs.size() > static_cast<std::size_t>(router::ConnectionMatrix::kSlots)) {
                throw RoutingError("router " + std::to_string(router) + " row for core " + std::to_string(in) +
                    " needs more than 5 slots");
            }
            int slot = 0;
            for (auto o : outs) {
                TransmissionMode mode = TransmissionMode::P2P;
                if (outs.size() > 1) {
                    mode = TransmissionMode::Broadcast;
                } else if (targeted[o] > 1) {
                    mode = TransmissionMode::Merge;
                }
                prog.routes.push_back(NetlistRoute{router, in, slot++, o, mode});
            }
        }
    }
    prog.relays.assign(relays.begin(), relays.end());
    return prog;
}

} // namespace nmsoc::compiler
