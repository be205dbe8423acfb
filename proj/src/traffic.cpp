#include "nmsoc/traffic.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "nmsoc/format.hpp"
#include "nmsoc/rng.hpp"
#include "nmsoc/routing.hpp"
#include "nmsoc/topology.hpp"

namespace nmsoc::router {
namespace {

struct Stats {
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    double latency_sum = 0;

    bool in_window(std::uint64_t cycle) const { return cycle >= begin && cycle < end; }
};

TrafficResult finish(const TrafficOptions& o, const Stats& st, const std::vector<const Router*>& routers,
    const std::map<NodeId, std::uint64_t>& completions, const std::map<NodeId, std::uint64_t>& drops,
    const EnergyCoefficients& k)
{
    TrafficResult r;
    r.options = o;
    r.measured_cycles = st.end - st.begin;
    r.injected = st.injected;
    r.delivered = st.delivered;
    r.mean_latency = st.delivered > 0 ? st.latency_sum / static_cast<double>(st.delivered) : 0.0;
    for (const auto* router : routers) {
        RouterTraffic t;
        t.router = router->id();
        t.completions = completions.at(router->id());
        t.throughput = static_cast<double>(t.completions) / static_cast<double>(r.measured_cycles);
        t.drops = drops.at(router->id());
        t.energy_pj = router_energy_pj(router->ledger(), k);
        r.aggregate_throughput += t.throughput;
        r.max_router_throughput = std::max(r.max_router_throughput, t.throughput);
        r.energy_pj += t.energy_pj;
        r.routers.push_back(t);
    }
    return r;
}

std::vector<MatrixEntry> single_router_matrix(TrafficPattern pattern, Rng& rng)
{
    std::vector<MatrixEntry> entries;
    for (int p = 0; p < kPorts; ++p) {
        switch (pattern) {
        case TrafficPattern::UniformRandom: {
            int dest = static_cast<int>(rng.below(kPorts - 1));
            dest += dest >= p ? 1 : 0;
            entries.push_back(MatrixEntry{p, 0, static_cast<CoreId>(dest + 1), TransmissionMode::P2P});
            break;
        }
        case TrafficPattern::Hotspot: {
            const int dest = p == 0 ? 1 : 0;
            entries.push_back(MatrixEntry{p, 0, static_cast<CoreId>(dest + 1), TransmissionMode::P2P});
            break;
        }
        case TrafficPattern::Neighbor:
            entries.push_back(MatrixEntry{p, 0, static_cast<CoreId>((p + 1) % kPorts + 1), TransmissionMode::P2P});
            break;
        case TrafficPattern::Broadcast:
            for (int s = 0; s < 3; ++s) {
                entries.push_back(
                    MatrixEntry{p, s, static_cast<CoreId>((p + 1 + s) % kPorts + 1), TransmissionMode::Broadcast});
            }
            break;
        }
    }
    std::map<CoreId, int> targeted;
    for (const auto& e : entries) {
        ++targeted[e.dest_core];
    }
    for (auto& e : entries) {
        if (e.mode == TransmissionMode::P2P && targeted[e.dest_core] > 1) {
            e.mode = TransmissionMode::Merge;
        }
    }
    return entries;
}

TrafficResult run_single(const Config& config, const TrafficOptions& o, const Stats& window)
{
    Rng rng(o.seed);
    std::vector<CoreId> neighbors{1, 2, 3, 4, 5};
    Router router(0, neighbors, RouterParams::from(config));
    const auto entries = single_router_matrix(o.pattern, rng);
    router.configure_matrix(entries);

    Stats st = window;
    std::array<std::deque<SpikeFlit>, kPorts> sources;
    std::uint64_t completions = 0;
    std::uint64_t drops = 0;
    std::uint64_t serial = 0;
    for (std::uint64_t cycle = 0; cycle < st.end; ++cycle) {
        for (int p = 0; p < kPorts; ++p) {
            if (rng.bernoulli(o.rate)) {
                SpikeFlit f;
                f.src_core = neighbors[static_cast<std::size_t>(p)];
                f.src_neuron = static_cast<std::uint32_t>(serial % 256);
                f.created_cycle = cycle;
                f.serial = serial++;
                sources[static_cast<std::size_t>(p)].push_back(f);
                st.injected += st.in_window(cycle);
            }
            auto& q = sources[static_cast<std::size_t>(p)];
            if (!q.empty() && router.can_accept(p)) {
                router.accept(p, q.front());
                q.pop_front();
            }
        }
        const auto report = router.tick(cycle);
        if (st.in_window(cycle)) {
            completions += report.completions;
            drops += report.drops;
        }
        for (int p = 0; p < kPorts; ++p) {
            for (int e = 0; e < config.core_eject_per_cycle; ++e) {
                auto f = router.eject(p);
                if (!f) {
                    break;
                }
                if (st.in_window(cycle)) {
                    ++st.delivered;
                    st.latency_sum += static_cast<double>(cycle - f->created_cycle);
                }
            }
        }
    }
    return finish(o, st, {&router}, {{0, completions}}, {{0, drops}}, EnergyCoefficients::from(config));
}

std::map<CoreId, std::set<CoreId>> noc_flows(const topology::TopologyGraph& g, TrafficPattern pattern, Rng& rng)
{
    const auto cores = g.nodes_of_kind(topology::NodeKind::Core);
    std::map<CoreId, std::set<CoreId>> flows;
    for (std::size_t i = 0; i < cores.size(); ++i) {
        const auto c = cores[i];
        const auto dist = topology::bfs_distances(g, c);
        std::vector<CoreId> near;
        for (auto other : cores) {
            if (dist[other] == 2) {
                near.push_back(other);
            }
        }
        switch (pattern) {
        case TrafficPattern::UniformRandom: {
            auto j = rng.below(cores.size() - 1);
            j += j >= i ? 1 : 0;
            flows[c].insert(cores[j]);
            break;
        }
        case TrafficPattern::Hotspot:
            flows[c].insert(c == cores[0] ? cores[1] : cores[0]);
            break;
        case TrafficPattern::Neighbor: {
            auto it = std::upper_bound(near.begin(), near.end(), c);
            flows[c].insert(it == near.end() ? near.front() : *it);
            break;
        }
        case TrafficPattern::Broadcast:
            for (std::size_t k = 0; k < 3 && k < near.size(); ++k) {
                flows[c].insert(near[k]);
            }
            break;
        }
    }
    return flows;
}

TrafficResult run_noc(const Config& config, const TrafficOptions& o, const Stats& window)
{
    Rng rng(o.seed);
    const auto g = topology::build_fullerene_domain();
    const auto flows = noc_flows(g, o.pattern, rng);
    const auto prog = compiler::synthesize_routes(flows, g);

    std::map<NodeId, std::unique_ptr<Router>> routers;
    const auto params = RouterParams::from(config);
    for (auto r : g.nodes_of_kind(topology::NodeKind::RouterL1)) {
        routers.emplace(r, std::make_unique<Router>(r, g.neighbors(r), params));
    }
    std::map<NodeId, std::vector<MatrixEntry>> entries;
    for (const auto& r : prog.routes) {
        entries[r.router].push_back(MatrixEntry{*routers.at(r.router)->port_of(r.in_core), r.slot, r.dest_core, r.mode});
    }
    for (auto& [id, list] : entries) {
        routers.at(id)->configure_matrix(list);
    }
    std::map<std::pair<CoreId, CoreId>, std::vector<NodeId>> relays;
    for (const auto& r : prog.relays) {
        relays[{r.core, r.origin}].push_back(r.router);
    }

    struct Link {
        CoreId core;
        NodeId router;
        int port;
        std::deque<SpikeFlit> queue;
    };
    std::vector<Link> links;
    std::map<std::pair<CoreId, NodeId>, std::size_t> link_of;
    const auto cores = g.nodes_of_kind(topology::NodeKind::Core);
    for (auto c : cores) {
        for (auto r : g.neighbors(c)) {
            link_of[{c, r}] = links.size();
            links.push_back(Link{c, r, *routers.at(r)->port_of(c), {}});
        }
    }
    auto forward = [&](CoreId at, const SpikeFlit& f) {
        if (auto it = relays.find({at, f.src_core}); it != relays.end()) {
            for (auto r : it->second) {
                links[link_of.at({at, r})].queue.push_back(f);
            }
        }
    };

    Stats st = window;
    std::map<CoreId, std::unordered_set<std::uint64_t>> seen;
    std::map<NodeId, std::uint64_t> completions;
    std::map<NodeId, std::uint64_t> drops;
    for (const auto& [id, r] : routers) {
        completions[id] = 0;
        drops[id] = 0;
    }
    std::uint64_t serial = 0;
    for (std::uint64_t cycle = 0; cycle < st.end; ++cycle) {
        for (auto c : cores) {
            if (rng.bernoulli(o.rate)) {
                SpikeFlit f;
                f.src_core = c;
                f.src_neuron = 0;
                f.created_cycle = cycle;
                f.serial = serial++;
                seen[c].insert(f.serial);
                forward(c, f);
                st.injected += st.in_window(cycle);
            }
        }
        for (auto& l : links) {
            auto& r = *routers.at(l.router);
            if (!l.queue.empty() && r.can_accept(l.port)) {
                r.accept(l.port, l.queue.front());
                l.queue.pop_front();
            }
        }
        for (auto& [id, r] : routers) {
            const auto report = r->tick(cycle);
            if (st.in_window(cycle)) {
                completions[id] += report.completions;
                drops[id] += report.drops;
            }
        }
        for (auto& [id, r] : routers) {
            const auto& nb = r->neighbor_cores();
            for (std::size_t p = 0; p < nb.size(); ++p) {
                for (int e = 0; e < config.core_eject_per_cycle; ++e) {
                    auto f = r->eject(static_cast<int>(p));
                    if (!f) {
                        break;
                    }
                    const auto at = nb[p];
                    if (!seen[at].insert(f->serial).second) {
                        continue;
                    }
                    if (flows.at(f->src_core).contains(at) && st.in_window(cycle)) {
                        ++st.delivered;
                        st.latency_sum += static_cast<double>(cycle - f->created_cycle);
                    }
                    forward(at, *f);
                }
            }
        }
    }
    std::vector<const Router*> list;
    for (const auto& [id, r] : routers) {
        list.push_back(r.get());
    }
    return finish(o, st, list, completions, drops, EnergyCoefficients::from(config));
}

} // namespace

std::string_view to_string(TrafficPattern pattern)
{
    switch (pattern) {
    case TrafficPattern::UniformRandom:
        return "uniform-random";
    case TrafficPattern::Hotspot:
        return "hotspot";
    case TrafficPattern::Neighbor:
        return "neighbor";
    case TrafficPattern::Broadcast:
        return "broadcast";
    }
    return "?";
}

TrafficPattern parse_pattern(std::string_view text)
{
    for (auto p : {TrafficPattern::UniformRandom, TrafficPattern::Hotspot, TrafficPattern::Neighbor,
             TrafficPattern::Broadcast}) {
        if (text == to_string(p)) {
            return p;
        }
    }
    throw std::invalid_argument("unknown traffic pattern '" + std::string(text) + "'");
}

TrafficResult run_traffic(const Config& config, const TrafficOptions& o)
{
    validate(config);
    if (!(o.rate > 0.0 && o.rate <= 1.0)) {
        throw std::invalid_argument("injection rate must be in (0, 1]");
    }
    const auto t = static_cast<std::uint64_t>(config.handshake_cycles);
    Stats window;
    window.begin = o.warmup_cycles;
    window.end = o.warmup_cycles + o.measure_cycles / t * t;
    if (window.end == window.begin) {
        throw std::invalid_argument("measurement window shorter than one handshake");
    }
    return o.single_router ? run_single(config, o, window) : run_noc(config, o, window);
}

std::string traffic_csv_header()
{
    return "pattern,rate,scope,router_id,throughput,completions,drops,energy_pj,injected,delivered,mean_latency";
}

std::string traffic_csv_rows(const TrafficResult& r)
{
    std::ostringstream out;
    const std::string prefix = std::string(to_string(r.options.pattern)) + ',' + format_fixed(r.options.rate, 4) + ',' +
        (r.options.single_router ? "router" : "noc") + ',';
    std::uint64_t completions = 0;
    std::uint64_t drops = 0;
    for (const auto& t : r.routers) {
        out << prefix << t.router << ',' << format_fixed(t.throughput) << ',' << t.completions << ',' << t.drops << ','
            << format_fixed(t.energy_pj) << ",,,\n";
        completions += t.completions;
        drops += t.drops;
    }
    out << prefix << "all," << format_fixed(r.aggregate_throughput) << ',' << completions << ',' << drops << ','
        << format_fixed(r.energy_pj) << ',' << r.injected << ',' << r.delivered << ',' << format_fixed(r.mean_latency)
        << '\n';
    return out.str();
}

} // namespace nmsoc::router
