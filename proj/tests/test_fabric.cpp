#include <doctest.h>

#include <algorithm>
#include <random>
#include <variant>

#include "nmsoc/compiler.hpp"
#include "nmsoc/fabric.hpp"
#include "nmsoc/golden.hpp"
#include "nmsoc/routing.hpp"

using namespace nmsoc;
using namespace nmsoc::fabric;

namespace {

bool valid_word(std::uint32_t w)
{
    const auto op = w & 0xFF;
    const auto operand = w >> 8;
    switch (op) {
    case 1:
    case 2:
        return operand <= 0xFF;
    case 3:
        return operand <= 0xF;
    case 4:
    case 5:
    case 6:
        return operand == 0;
    case 7:
        return operand <= 3;
    default:
        return false;
    }
}

NodeId shared_router(CoreId a, CoreId b)
{
    const auto g = topology::build_fullerene_domain();
    for (auto r : g.neighbors(a)) {
        if (g.adjacent(r, b)) {
            return r;
        }
    }
    throw std::logic_error("no shared router");
}

// Core 12: input neuron 0. Core 13: neuron 0 listens to (12, 0) with weight 5.
Netlist two_core_netlist(std::int32_t threshold = 5)
{
    Netlist n;
    n.neurons_per_core = 4;
    NetlistCore a;
    a.id = 12;
    a.weight_count = 4;
    a.neurons = 1;
    a.codebook = {0, 0, 0, 0};
    NetlistCore b = a;
    b.id = 13;
    b.threshold = threshold;
    b.codebook = {5, 0, 0, 0};
    n.cores = {a, b};
    n.synapses = {{13, 12, 0, 0, 0}};
    const auto r = shared_router(12, 13);
    n.routes = {{r, 12, 0, 13, router::TransmissionMode::P2P}};
    n.relays = {{12, 12, r}};
    n.inputs = {{12, 0}};
    n.outputs = {{13, 0, 2, 7}};
    return n;
}

struct Workload {
    Netlist netlist;
    std::vector<Spike> trace;
};

Workload random_workload(std::uint64_t seed, std::uint32_t timesteps)
{
    Rng rng(seed);
    const auto net = compiler::random_network(rng);
    const auto inputs = compiler::random_input_spikes(net, timesteps, 0.2, rng);
    compiler::CompileOptions opts;
    const int sizes[] = {4, 8, 16};
    opts.weight_count = sizes[rng.below(3)];
    opts.weight_width = sizes[rng.below(3)];
    opts.neurons_per_core = 16;
    const auto compiled = compiler::compile(net, topology::build_fullerene_domain(), opts);
    return {compiled.netlist, compiler::map_spikes(compiled.placement, inputs)};
}

} // namespace

TEST_CASE("ISA: every word either round-trips or is rejected")
{
    std::size_t valid = 0;
    auto check = [&](std::uint32_t w) {
        if (valid_word(w)) {
            ++valid;
            REQUIRE(encode(decode(w)) == w);
        } else {
            REQUIRE_THROWS_AS(decode(w), DecodeError);
        }
    };
    for (std::uint32_t w = 0; w < (1u << 16); ++w) {
        check(w);
    }
    CHECK(valid == 256 + 256 + 16 + 1 + 1 + 1 + 4);
    std::mt19937 rng(1);
    for (int i = 0; i < 20000; ++i) {
        check(static_cast<std::uint32_t>(rng()) | (1u << 16));
    }
}

TEST_CASE("ISA: text form")
{
    const std::vector<Instruction> program{InitParams{}, InitParams{3}, CoreEnable{19}, NetworkStart{0b0101},
        WakeOnTimestep{}, Sleep{}, WakeOnFinish{}, ReadOutput{3}};
    for (const auto& i : program) {
        CHECK(parse_instruction(to_string(i)) == i);
    }
    CHECK(to_string(InitParams{}) == "init_params all");
    CHECK(parse_instruction("core_enable 0x13") == Instruction{CoreEnable{19}});
    CHECK(decode_program(encode_program(program)) == program);
    CHECK(encode(CoreEnable{3}) == 0x0302u);
    CHECK_THROWS(parse_instruction("core_enable 256"));
    CHECK_THROWS(parse_instruction("jump 4"));
    CHECK_THROWS(encode(NetworkStart{0x10}));
    CHECK_THROWS(encode(ReadOutput{4}));
    try {
        decode(0);
        FAIL("zero word decoded");
    } catch (const DecodeError& e) {
        CHECK(e.word() == 0);
    }
}

TEST_CASE("output buffer")
{
    OutputBuffer b;
    CHECK(OutputBuffer::kCapacity == 51);
    for (std::uint16_t i = 0; i < 51; ++i) {
        CHECK(b.push({static_cast<std::uint16_t>(i * 100 % 8192), i}));
    }
    CHECK_FALSE(b.overflow());
    CHECK_FALSE(b.push({1, 1}));
    CHECK(b.overflow());
    CHECK(b.dropped() == 1);
    const auto bytes = b.dump();
    CHECK(bytes.size() == 204);
    CHECK(OutputBuffer::decode(bytes) == b.records());
    CHECK(b.drain().size() == 51);
    CHECK(b.overflow());
    b.clear_overflow();
    CHECK_FALSE(b.overflow());
    CHECK_THROWS(OutputBuffer::decode(std::vector<std::uint8_t>(3)));

    OutputBuffer one;
    one.push({0x1ABC, 0x1234});
    CHECK(one.dump() == std::vector<std::uint8_t>{0xBC, 0x1A, 0x34, 0x12});
}

TEST_CASE("a routed spike fires its target in the same timestep")
{
    const auto netlist = two_core_netlist();
    const std::vector<Spike> trace{{0, 12, 0}, {2, 12, 0}};
    const auto res = run_inference(netlist, trace, 4, Config{});
    CHECK(res.spikes == std::vector<Spike>{{0, 13, 0}, {2, 13, 0}});
    CHECK(res.outputs[2] == std::vector<OutputRecord>{{7, 0}, {7, 2}});
    CHECK(res.telemetry.timesteps == 4);
    CHECK(res.telemetry.ledger.hops_p2p == 2);
    CHECK(res.telemetry.ledger.sops == 2);
    CHECK(res.telemetry.flits_injected == 2);
    CHECK(res.telemetry.flits_delivered == 2);
    CHECK(res.spikes == compiler::golden_eval(netlist, trace, 4, core::MpRange::of_bits(16)));

    const auto sub = run_inference(two_core_netlist(10), trace, 4, Config{});
    CHECK(sub.spikes == std::vector<Spike>{{2, 13, 0}});
}

TEST_CASE("empty trace produces no spikes")
{
    const auto res = run_inference(two_core_netlist(), {}, 5, Config{});
    CHECK(res.spikes.empty());
    CHECK(res.telemetry.timesteps == 5);
    CHECK(res.telemetry.ledger.sops == 0);
}

TEST_CASE("input spikes must target input neurons")
{
    const std::vector<Spike> bad{{0, 13, 0}};
    CHECK_THROWS_AS(run_inference(two_core_netlist(), bad, 1, Config{}), ConfigError);
}

TEST_CASE("netlist validation against the fabric")
{
    auto n = two_core_netlist();
    n.cores[0].id = 5;
    CHECK_THROWS_AS(Fabric(n, Config{}), ConfigError);
    n = two_core_netlist();
    n.routes[0].router = 12;
    CHECK_THROWS_AS(Fabric(n, Config{}), ConfigError);
}

TEST_CASE("fabric matches the golden reference on random networks")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto w = random_workload(seed, 30);
        const auto res = run_inference(w.netlist, w.trace, 30, Config{});
        CAPTURE(seed);
        CHECK(res.spikes == compiler::golden_eval(w.netlist, w.trace, 30, core::MpRange::of_bits(16)));
        CHECK(res.telemetry.flits_injected > 0);
    }
}

TEST_CASE("thread count does not change the results")
{
    const auto w = random_workload(7, 20);
    const Config config;
    const auto a = run_inference(w.netlist, w.trace, 20, config, 1);
    const auto b = run_inference(w.netlist, w.trace, 20, config, 4);
    CHECK(a.spikes == b.spikes);
    CHECK(telemetry_csv(a.telemetry, config) == telemetry_csv(b.telemetry, config));
    CHECK(router_samples_csv(a.telemetry) == router_samples_csv(b.telemetry));
    CHECK(a.outputs == b.outputs);
}

TEST_CASE("telemetry CSV shape")
{
    const auto res = run_inference(two_core_netlist(), std::vector<Spike>{{0, 12, 0}}, 2, Config{});
    const auto csv = telemetry_csv(res.telemetry, Config{});
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.starts_with("timesteps,cycles,"));
    CHECK(router_samples_csv(res.telemetry).starts_with("cycle,router_id,grants,drops,occupancy,energy_pj\n"));
}

TEST_CASE("output buffer overflow is sticky and counted")
{
    std::vector<Spike> trace;
    for (std::uint32_t t = 0; t < 60; ++t) {
        trace.push_back({t, 12, 0});
    }
    Fabric f(two_core_netlist(), Config{});
    f.init_params(kAllCores);
    f.enable_core(0);
    f.enable_core(1);
    std::vector<Instruction> program{NetworkStart{1}, WakeOnFinish{}, Sleep{}};
    const auto host = f.host_program(program, trace, 60);
    CHECK(host.run.outputs[2].size() == 51);
    CHECK(f.output_buffer(2).overflow());
    CHECK(host.run.telemetry.output_overflows == 9);
}

TEST_CASE("host program sleeps and wakes")
{
    const std::vector<Spike> trace{{0, 12, 0}, {1, 12, 0}, {2, 12, 0}};
    Fabric f(two_core_netlist(), Config{});
    std::vector<Instruction> program{InitParams{}, CoreEnable{0}, CoreEnable{1}, NetworkStart{1}, WakeOnTimestep{},
        Sleep{}, ReadOutput{2}, WakeOnFinish{}, Sleep{}, ReadOutput{2}};
    const auto host = f.host_program(program, trace, 3);
    CHECK(host.wakes == std::vector<WakeEvent>{WakeEvent::TimestepSwitch, WakeEvent::NetworkComputingFinish});
    REQUIRE(host.reads.size() == 2);
    CHECK(host.reads[0].second == std::vector<OutputRecord>{{7, 0}});
    CHECK(host.reads[1].second == std::vector<OutputRecord>{{7, 1}, {7, 2}});
    CHECK(f.barrier().committed == 3);
    CHECK(host.host_sleep_cycles > 0);
}

TEST_CASE("host errors")
{
    Fabric f(two_core_netlist(), Config{});
    std::vector<Instruction> bad_core{CoreEnable{31}};
    CHECK_THROWS_AS(f.host_program(bad_core, {}, 1), RangeError);
    std::vector<Instruction> bad_init{InitParams{20}};
    CHECK_THROWS_AS(f.host_program(bad_init, {}, 1), RangeError);

    Config quick;
    quick.watchdog_cycles = 100;
    Fabric g(two_core_netlist(), quick);
    std::vector<Instruction> no_start{InitParams{}, Sleep{}};
    CHECK_THROWS_AS(g.host_program(no_start, {}, 1), WatchdogError);

    Fabric h(two_core_netlist(), Config{});
    std::vector<Instruction> finished{InitParams{}, CoreEnable{0}, CoreEnable{1}, NetworkStart{1}, Sleep{}, Sleep{}};
    CHECK_THROWS_AS(h.host_program(finished, {}, 1), WatchdogError);
}

TEST_CASE("DMA writes are refused while a core is enabled")
{
    Fabric f(two_core_netlist(), Config{});
    f.init_params(kAllCores);
    const std::vector<std::uint8_t> mp{3, 0};
    f.mpdma(1, mp);
    CHECK(f.core_at(1).neurons()[0].mp == 3);
    CHECK_THROWS_AS(f.mpdma(1, std::vector<std::uint8_t>{0, 0, 0}), BoundsError);
    f.enable_core(1);
    CHECK_THROWS_AS(f.mpdma(1, mp), BusyError);
    CHECK_THROWS_AS(f.idma(1, std::vector<std::uint8_t>{0}), BusyError);
    CHECK(f.core_node(0) == 12);
    CHECK(f.core_index(31) == 19);
    CHECK_THROWS_AS(f.core_index(0), RangeError);
}

TEST_CASE("a stuck router trips the watchdog")
{
    Config config;
    config.core_eject_per_cycle = 0;
    config.watchdog_cycles = 500;
    try {
        run_inference(two_core_netlist(), std::vector<Spike>{{0, 12, 0}}, 1, config);
        FAIL("expected a deadlock");
    } catch (const DeadlockError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("no progress for 500 cycles") != std::string::npos);
        CHECK(msg.find("timestep 0") != std::string::npos);
    }
}

TEST_CASE("saturated eject links deadlock with hung ports reported")
{
    Config config;
    config.core_eject_per_cycle = 0;
    config.watchdog_cycles = 200;
    auto n = two_core_netlist();
    // Many inputs flood the one link until buffers fill.
    n.cores[0].neurons = 12;
    n.inputs.clear();
    for (std::uint32_t i = 0; i < 12; ++i) {
        n.inputs.push_back({12, i});
        n.synapses.push_back({13, 12, i, 0, 0});
    }
    std::sort(n.synapses.begin(), n.synapses.end());
    n.synapses.erase(std::unique(n.synapses.begin(), n.synapses.end()), n.synapses.end());
    std::vector<Spike> trace;
    for (std::uint32_t i = 0; i < 12; ++i) {
        trace.push_back({0, 12, i});
    }
    try {
        run_inference(n, trace, 1, config);
        FAIL("expected a deadlock");
    } catch (const DeadlockError& e) {
        CHECK(std::string(e.what()).find("hung ports: router") != std::string::npos);
    }
}
