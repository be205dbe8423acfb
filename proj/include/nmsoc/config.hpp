#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace nmsoc {

/// Simulator parameters. Every field maps to one `key=value` line of the
/// configuration file; the defaults are the shipped calibration.
struct Config {
    double freq_mhz = 200.0;

    // Core energy: dynamic energy per synapse lookup plus per-cycle overheads.
    double e_sop_pj = 0.436;
    double e_core_active_cycle_pj = 0.6;
    double e_core_idle_cycle_pj = 0.05;
    double e_core_gated_cycle_pj = 0.005;

    // Router energy per hop (P2P, merge) and per delivered broadcast copy.
    double e_hop_p2p_pj = 0.026;
    double e_hop_bcast_pj = 0.009;

    int buffer_depth = 4;
    int grants_per_cycle = 2;
    int handshake_cycles = 5;

    int neurons_per_core = 256;
    int mp_bits = 16;
    int pipeline_buffer_depth = 2;
    int spe_spike_overhead_cycles = 3;
    int core_eject_per_cycle = 1;

    std::int64_t watchdog_cycles = 1000000;
    std::int64_t router_sample_cycles = 100;

    // Synthetic workload used by the sparsity sweep.
    int sweep_inputs = 4096;
    int sweep_neurons = 256;
    int sweep_fanout = 44;

    bool operator==(const Config&) const = default;
};

/// Throws ConfigError when a value is out of its legal range.
void validate(const Config& config);

/// Parses `key = value` lines on top of the defaults. Blank lines and `#`
/// comments are ignored; unknown keys are errors.
Config parse_config(std::string_view text, const std::string& source = "<config>");

Config load_config(const std::filesystem::path& path);

/// Loads `explicit_path` if given, else $NOC_SIM_CONFIG if set, else defaults.
Config resolve_config(const std::optional<std::filesystem::path>& explicit_path);

/// Canonical `key=value` rendering, one line per key, in declaration order.
std::string to_text(const Config& config);

} // namespace nmsoc
