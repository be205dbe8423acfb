#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "nmsoc/compiler.hpp"
#include "nmsoc/golden.hpp"
#include "nmsoc/placement.hpp"
#include "nmsoc/quantize.hpp"
#include "nmsoc/routing.hpp"

using namespace nmsoc;
using namespace nmsoc::compiler;

namespace {

std::vector<double> random_weights(Rng& rng, std::size_t n)
{
    std::vector<double> w(n);
    for (auto& x : w) {
        // Mixture so the distribution is far from uniform.
        x = rng.bernoulli(0.7) ? rng.uniform(-0.2, 0.2) : rng.uniform(-1.5, 2.0);
    }
    return w;
}

// N equal bins over [min, max], midpoint reconstruction.
double grid_mse(const std::vector<double>& w, int levels)
{
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    const double width = (*hi - *lo) / levels;
    double sse = 0;
    for (double x : w) {
        int bin = width > 0 ? static_cast<int>((x - *lo) / width) : 0;
        bin = std::clamp(bin, 0, levels - 1);
        const double mid = *lo + (bin + 0.5) * width;
        sse += (x - mid) * (x - mid);
    }
    return sse / static_cast<double>(w.size());
}

double sse_of(const std::vector<double>& w, const std::vector<double>& levels)
{
    double sse = 0;
    for (double x : w) {
        double best = std::numeric_limits<double>::infinity();
        for (double c : levels) {
            best = std::min(best, (x - c) * (x - c));
        }
        sse += best;
    }
    return sse;
}

// Integer LIF reference over a netlist.
std::vector<Spike> reference_run(const Netlist& nl, const std::vector<Spike>& inputs, std::uint32_t steps)
{
    const std::int64_t lo = -32768;
    const std::int64_t hi = 32767;
    std::map<NeuronRef, std::int64_t> mp;
    std::set<NeuronRef> last;
    std::vector<Spike> out;
    for (std::uint32_t t = 0; t < steps; ++t) {
        std::set<NeuronRef> active = last;
        for (const auto& s : inputs) {
            if (s.timestep == t) {
                active.insert({s.core, s.neuron});
            }
        }
        std::map<NeuronRef, std::int64_t> in;
        for (const auto& syn : nl.synapses) {
            if (active.count({syn.pre_core, syn.pre_neuron})) {
                in[{syn.core, syn.post}] += nl.find_core(syn.core)->codebook[syn.index];
            }
        }
        last.clear();
        for (const auto& c : nl.cores) {
            for (std::uint32_t n = 0; n < c.neurons; ++n) {
                const NeuronRef r{c.id, n};
                if (nl.is_input(c.id, n)) {
                    continue;
                }
                auto v = mp[r];
                if (in.count(r)) {
                    v = std::clamp(v + in[r], lo, hi);
                }
                v = std::clamp(v - c.leak, lo, hi);
                if (v >= c.threshold) {
                    v = c.reset == core::ResetMode::ToZero ? 0 : std::clamp(v - c.threshold, lo, hi);
                    last.insert(r);
                    out.push_back({t, c.id, n});
                }
                mp[r] = v;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

NetworkDescription chain_network(std::uint32_t in, std::uint32_t hidden, double threshold = 1.0)
{
    NetworkDescription net;
    net.layers = {{in, 1.0, 0.0, core::ResetMode::ToZero, true}, {hidden, threshold, 0.0, core::ResetMode::ToZero, false}};
    for (std::uint32_t i = 0; i < in; ++i) {
        for (std::uint32_t h = 0; h < hidden; ++h) {
            net.connections.push_back({i, in + h, 0.5});
        }
    }
    return net;
}

} // namespace

TEST_CASE("uniform grid quantizer matches the bin oracle")
{
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const auto w = random_weights(rng, 10 + rng.below(300));
        for (int N : {4, 8, 16}) {
            CHECK(uniform_quantize(w, N).mse == doctest::Approx(grid_mse(w, N)).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(uniform_quantize(std::vector<double>{}, 4), std::invalid_argument);
    CHECK_THROWS_AS(uniform_quantize(std::vector<double>{1.0}, 5), std::invalid_argument);
}

TEST_CASE("Lloyd-Max never loses to the grid and never climbs")
{
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto w = random_weights(rng, 20 + rng.below(500));
        const int sizes[] = {4, 8, 16};
        const int N = sizes[rng.below(3)];
        const auto r = lloyd_max(w, N);
        CHECK(r.centroids.size() == static_cast<std::size_t>(N));
        CHECK(std::is_sorted(r.centroids.begin(), r.centroids.end()));
        CHECK(r.mse <= grid_mse(w, N) + 1e-12);
        CHECK(r.mse <= r.uniform_mse + 1e-12);
        for (std::size_t i = 1; i < r.objective.size(); ++i) {
            CHECK(r.objective[i] <= r.objective[i - 1]);
        }
        CHECK(r.objective.back() == doctest::Approx(sse_of(w, r.centroids)));
        CHECK(r.iterations <= kLloydMaxIterations);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double mine = std::abs(w[i] - r.centroids[r.indexes[i]]);
            for (double c : r.centroids) {
                CHECK(mine <= std::abs(w[i] - c) + 1e-12);
            }
        }
        std::size_t total = 0;
        for (auto o : r.occupancy) {
            total += o;
        }
        CHECK(total == w.size());
    }
}

TEST_CASE("few distinct weights are represented exactly")
{
    const std::vector<double> w{0.5, -0.25, 0.5, 1.0, -0.25, 0.5};
    for (int N : {4, 8}) {
        const auto r = lloyd_max(w, N);
        CHECK(r.mse == 0.0);
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(r.centroids[r.indexes[i]] == w[i]);
        }
    }
    const std::vector<double> same(5, 0.3);
    CHECK(lloyd_max(same, 4).mse == 0.0);
}

TEST_CASE("codebook scaling fits the weight width")
{
    Rng rng(2);
    for (int W : {4, 8, 16}) {
        const auto w = random_weights(rng, 200);
        const auto q = quantize_codebook(w, 16, W, 1e300);
        const int top = (1 << (W - 1)) - 1;
        int peak = 0;
        for (auto v : q.codebook.values()) {
            CHECK(v >= -top - 1);
            CHECK(v <= top);
            peak = std::max(peak, std::abs(v));
        }
        CHECK(peak == top);
        const auto capped = quantize_codebook(w, 16, W, 2.0);
        CHECK(capped.scale <= 2.0);
    }
    CHECK_THROWS_AS(quantize_codebook(std::vector<double>{1.0}, 16, 5), std::invalid_argument);
}

TEST_CASE("placement spreads groups and respects capacity")
{
    const auto g = topology::build_fullerene_domain();
    const auto net = chain_network(20, 30);
    const auto p = place(net, g, PlacementOptions{16, false});
    CHECK(p.location.size() == 50);
    std::set<NeuronRef> distinct(p.location.begin(), p.location.end());
    CHECK(distinct.size() == 50);
    std::uint32_t placed = 0;
    for (auto [core, load] : p.load) {
        CHECK(load <= 16);
        CHECK(g.kind(core) == topology::NodeKind::Core);
        placed += load;
    }
    CHECK(placed == 50);
    CHECK(p.cores_used() == std::vector<CoreId>{12, 13, 14, 15});
    for (const auto& ref : p.location) {
        CHECK(ref.neuron < p.load.at(ref.core));
    }

    const auto improved = place(net, g, PlacementOptions{16, true});
    CHECK(inter_core_edges(net, improved) <= inter_core_edges(net, p));

    CHECK_THROWS_AS(place(chain_network(200, 200), g, PlacementOptions{16, false}), PlacementError);
    CHECK_THROWS_AS(place(net, g, PlacementOptions{0, false}), std::invalid_argument);
}

TEST_CASE("placement separates parameter classes")
{
    NetworkDescription net;
    net.layers = {{4, 1.0, 0.0, core::ResetMode::ToZero, true}, {4, 1.0, 0.0, core::ResetMode::ToZero, false},
        {4, 2.0, 0.0, core::ResetMode::Subtract, false}};
    const auto p = place(net, topology::build_fullerene_domain(), PlacementOptions{256, true});
    CHECK(p.location[4].core != p.location[8].core);
    CHECK(p.location[0].core == p.location[4].core);
}

TEST_CASE("improvement pass never increases cut edges")
{
    const auto g = topology::build_fullerene_domain();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const auto net = random_network(rng);
        const auto base = place(net, g, PlacementOptions{32, false});
        const auto better = place(net, g, PlacementOptions{32, true});
        CHECK(inter_core_edges(net, better) <= inter_core_edges(net, base));
    }
}

TEST_CASE("routes follow shortest paths")
{
    const auto g = topology::build_fullerene_domain();
    std::map<CoreId, std::set<CoreId>> all;
    for (CoreId a = 12; a < 32; ++a) {
        for (CoreId b = 12; b < 32; ++b) {
            if (a != b) {
                all[a].insert(b);
            }
        }
    }
    const auto prog = synthesize_routes(all, g);
    CHECK(prog.paths.size() == 380);
    std::int64_t hops = 0;
    for (const auto& [pair, path] : prog.paths) {
        const auto dist = topology::bfs_distances(g, pair.first);
        CHECK(path.size() - 1 == dist[pair.second]);
        CHECK(path.front() == pair.first);
        CHECK(path.back() == pair.second);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            CHECK(g.adjacent(path[i], path[i + 1]));
        }
        hops += static_cast<std::int64_t>(path.size() - 1);
    }
    CHECK(topology::Rational(hops, 380) == topology::Rational(60, 19));
    std::map<NodeId, std::size_t> cells;
    for (const auto& r : prog.routes) {
        ++cells[r.router];
        CHECK(r.slot < 5);
    }
    for (auto [router, n] : cells) {
        CHECK(n <= 25);
    }
}

TEST_CASE("one source reaching three cores through one router broadcasts")
{
    const auto g = topology::build_fullerene_domain();
    const NodeId r = g.neighbors(12).front();
    std::set<CoreId> dests;
    for (auto c : g.neighbors(r)) {
        if (c != 12 && dests.size() < 3) {
            dests.insert(c);
        }
    }
    const auto prog = synthesize_routes({{12, dests}}, g);
    REQUIRE(prog.routes.size() == 3);
    for (const auto& route : prog.routes) {
        CHECK(route.router == r);
        CHECK(route.mode == router::TransmissionMode::Broadcast);
    }
    CHECK(prog.relays == std::vector<NetlistRelay>{{12, 12, r}});
}

TEST_CASE("two sources converging on one core merge")
{
    const auto g = topology::build_fullerene_domain();
    const NodeId r = g.neighbors(12).front();
    std::vector<CoreId> others;
    for (auto c : g.neighbors(r)) {
        if (c != 12) {
            others.push_back(c);
        }
    }
    const auto prog = synthesize_routes({{12, {others[0]}}, {others[1], {others[0]}}}, g);
    REQUIRE(prog.routes.size() == 2);
    for (const auto& route : prog.routes) {
        CHECK(route.mode == router::TransmissionMode::Merge);
    }
}

TEST_CASE("routing errors")
{
    const auto two = topology::compose_domains(2, topology::InterLink::Chain);
    CHECK_THROWS_AS(synthesize_routes({{12, {45}}}, two), RoutingError);
}

TEST_CASE("netlist round trip")
{
    Rng rng(3);
    const auto net = random_network(rng);
    CompileOptions o;
    o.neurons_per_core = 32;
    const auto c = compile(net, topology::build_fullerene_domain(), o);
    const auto text = emit_netlist(c.netlist);
    CHECK(text.starts_with("nmsoc-netlist 1\n"));
    CHECK(parse_netlist(text) == c.netlist);
    CHECK(emit_netlist(parse_netlist(text)) == text);
}

TEST_CASE("netlist parse errors carry line numbers")
{
    const std::string head = "nmsoc-netlist 1\nneurons_per_core 4\ncore 12 N 4 W 8 threshold 1 leak 0 reset zero neurons 2\ncodebook 12 1 2 3 4\n";
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_netlist(text, "x.net");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of(head) == 0);
    CHECK(line_of(head + "bogus 1\n") == 5);
    CHECK(line_of(head + "syn 12 12:0 1 9\n") == 5);
    CHECK(line_of(head + "syn 12 12-0 1 0\n") == 5);
    CHECK(line_of(head + "core 12 N 4 W 8 threshold 1 leak 0 reset zero neurons 2\n") == 5);
    CHECK(line_of("nmsoc-netlist 2\n") == 1);
    CHECK(line_of(head + "\n# fine\nroute 0 12 7 13 p2p\n") == 7);
    CHECK(line_of("nmsoc-netlist 1\ncore 12 N 3 W 8 threshold 1 leak 0 reset zero neurons 2\n") == 2);
    try {
        parse_netlist(head + "bogus\n", "x.net");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).starts_with("x.net:5: "));
    }
}

TEST_CASE("network format")
{
    const std::string text = "# two layers\nlayer 2 1 0 zero input\nlayer 1 0.5 0.1 sub\nconn 0 2 0.7\nconn 1 2 -0.2\n";
    const auto net = parse_network(text);
    CHECK(net.neuron_count() == 3);
    CHECK(net.layers[1].reset == core::ResetMode::Subtract);
    CHECK(net.is_input(1));
    CHECK_FALSE(net.is_input(2));
    CHECK(net.first_neuron(1) == 2);
    CHECK(parse_network(emit_network(net)) == net);
    CHECK_THROWS(parse_network("layer 1 1 0 zero input\nconn 0 0 1\n"));
    CHECK_THROWS(parse_network("layer 2 1 0 zero\nconn 0 5 1\n"));
    CHECK_THROWS(parse_network("layer 2 1 -1 zero\n"));
    CHECK_THROWS(parse_network("neuron 3\n"));
}

TEST_CASE("real-valued golden examples")
{
    const auto net = parse_network("layer 1 1 0 zero input\nlayer 1 1 0 zero\nconn 0 1 0.6\n");
    const std::vector<NeuronSpike> in{{0, 0}, {1, 0}, {3, 0}};
    CHECK(golden_eval(net, in, 5) == std::vector<NeuronSpike>{{1, 1}});

    const auto chain = parse_network("layer 1 1 0 zero input\nlayer 1 1 0 zero\nlayer 1 1 0 zero\nconn 0 1 1\nconn 1 2 1\n");
    const std::vector<NeuronSpike> one{{0, 0}};
    CHECK(golden_eval(chain, one, 3) == std::vector<NeuronSpike>{{0, 1}, {1, 2}});

    const auto leaky = parse_network("layer 1 1 0 zero input\nlayer 1 1 0.5 sub\nconn 0 1 1.25\n");
    const std::vector<NeuronSpike> two{{0, 0}, {1, 0}};
    CHECK(golden_eval(leaky, two, 2) == std::vector<NeuronSpike>{{1, 1}});
}

TEST_CASE("compiled networks agree with an independent integer reference")
{
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Rng rng(seed);
        const auto net = random_network(rng);
        const auto inputs = random_input_spikes(net, 20, 0.3, rng);
        CompileOptions o;
        o.neurons_per_core = 16;
        o.weight_count = 8;
        o.weight_width = 4;
        const auto c = compile(net, topology::build_fullerene_domain(), o);
        const auto trace = map_spikes(c.placement, inputs);
        CHECK(golden_eval(c.netlist, trace, 20, core::MpRange::of_bits(16)) == reference_run(c.netlist, trace, 20));
    }
}

TEST_CASE("compile output")
{
    const auto net = chain_network(3, 4);
    CompileOptions o;
    o.output_buffer = 3;
    const auto c = compile(net, topology::build_fullerene_domain(), o);
    CHECK(c.netlist.inputs.size() == 3);
    REQUIRE(c.netlist.outputs.size() == 4);
    for (std::uint32_t i = 0; i < 4; ++i) {
        CHECK(c.netlist.outputs[i].buffer == 3);
        CHECK(c.netlist.outputs[i].id == i);
    }
    REQUIRE(c.netlist.cores.size() == 1);
    const auto& core = c.netlist.cores.front();
    CHECK(core.threshold >= 1);
    CHECK(c.netlist.synapses.size() == 12);
    CHECK(c.netlist.routes.empty());

    auto doubled = net;
    doubled.connections.push_back({0, 3, 0.5});
    const auto d = compile(doubled, topology::build_fullerene_domain(), o);
    CHECK(d.netlist.synapses.size() == 12);

    o.weight_count = 5;
    CHECK_THROWS_AS(compile(net, topology::build_fullerene_domain(), o), std::invalid_argument);
    o.weight_count = 4;
    o.output_buffer = 4;
    CHECK_THROWS_AS(compile(net, topology::build_fullerene_domain(), o), std::invalid_argument);
}

TEST_CASE("random networks")
{
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        const auto net = random_network(rng);
        CHECK(net.layers.size() == 3);
        CHECK(net.neuron_count() >= 64);
        CHECK(net.neuron_count() <= 256);
        CHECK(net.layers.front().input);
        CHECK_NOTHROW(validate(net));
    }
    Rng a(9);
    Rng b(9);
    CHECK(random_network(a) == random_network(b));
}

TEST_CASE("placement examples")
{
    const auto g = topology::build_fullerene_domain();
    const auto small = chain_network(4, 6);
    const auto one = place(small, g, PlacementOptions{256, true});
    CHECK(one.cores_used() == std::vector<CoreId>{12});
    CHECK(inter_core_edges(small, one) == 0);

    NetworkDescription two;
    two.layers = {{256, 1.0, 0.0, core::ResetMode::ToZero, true}, {256, 1.0, 0.0, core::ResetMode::ToZero, false}};
    for (std::uint32_t i = 0; i < 256; ++i) {
        two.connections.push_back({i, 256 + (i * 7) % 256, 0.1});
    }
    CHECK(place(two, g, PlacementOptions{256, true}).cores_used().size() == 2);
}

TEST_CASE("neighbors across one router get a single P2P entry")
{
    const auto g = topology::build_fullerene_domain();
    const NodeId r = g.neighbors(12).front();
    const CoreId other = g.neighbors(r)[1] == 12 ? g.neighbors(r)[0] : g.neighbors(r)[1];
    const auto prog = synthesize_routes({{12, {other}}}, g);
    REQUIRE(prog.routes.size() == 1);
    CHECK(prog.routes[0].mode == router::TransmissionMode::P2P);
    CHECK(prog.paths.at({12, other}).size() == 3);
}

TEST_CASE("Gaussian weights quantize better than the grid")
{
    Rng rng(12);
    std::vector<double> w(1000);
    for (auto& x : w) {
        // Box-Muller over the portable uniform stream.
        const double u1 = 1.0 - rng.uniform();
        const double u2 = rng.uniform();
        x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2) * 0.3;
    }
    const auto r = lloyd_max(w, 16);
    CHECK(r.mse <= grid_mse(w, 16));
    CHECK(r.mse < 0.9 * grid_mse(w, 16));
}
