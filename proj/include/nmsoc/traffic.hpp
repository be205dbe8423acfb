#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nmsoc/config.hpp"
#include "nmsoc/router.hpp"

namespace nmsoc::router {

enum class TrafficPattern { UniformRandom, Hotspot, Neighbor, Broadcast };

std::string_view to_string(TrafficPattern pattern);
TrafficPattern parse_pattern(std::string_view text);

struct TrafficOptions {
    TrafficPattern pattern = TrafficPattern::UniformRandom;
    double rate = 0.1; // flits per source per cycle, in (0, 1]
    std::uint64_t warmup_cycles = 2000;
    std::uint64_t measure_cycles = 20000; // rounded down to a multiple of the handshake time
    std::uint64_t seed = 1;
    bool single_router = false; // one router with five always-ready sinks
};

struct RouterTraffic {
    NodeId router = 0;
    std::uint64_t completions = 0; // transfers finished in the window
    double throughput = 0;         // completions per cycle
    std::uint64_t drops = 0;
    double energy_pj = 0;
};

struct TrafficResult {
    TrafficOptions options;
    std::uint64_t measured_cycles = 0;
    std::vector<RouterTraffic> routers;
    std::uint64_t injected = 0;  // flits generated in the window
    std::uint64_t delivered = 0; // flits reaching a destination in the window
    double mean_latency = 0;     // cycles from generation to delivery
    double aggregate_throughput = 0; // sum of per-router throughput
    double max_router_throughput = 0;
    double energy_pj = 0;
};

/// Drives the routers with synthetic traffic. Sources have unbounded queues
/// and offer one flit per link per cycle at most; sinks eject
/// core_eject_per_cycle flits per output port per cycle.
TrafficResult run_traffic(const Config& config, const TrafficOptions& options);

std::string traffic_csv_header();
/// One row per router followed by an aggregate row (router_id `all`).
std::string traffic_csv_rows(const TrafficResult& result);

} // namespace nmsoc::router
