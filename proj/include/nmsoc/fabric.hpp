#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "nmsoc/config.hpp"
#include "nmsoc/core.hpp"
#include "nmsoc/energy.hpp"
#include "nmsoc/isa.hpp"
#include "nmsoc/netlist.hpp"
#include "nmsoc/router.hpp"
#include "nmsoc/spike_trace.hpp"
#include "nmsoc/topology.hpp"

namespace nmsoc::fabric {

struct OutputRecord {
    std::uint16_t neuron_id = 0; // 13 bits
    std::uint16_t timestep = 0;

    auto operator<=>(const OutputRecord&) const = default;
};

/// 204-byte result buffer of 4-byte little-endian records: neuron id in
/// bits 0..12, timestep in bits 16..31. On overflow the newest record is
/// dropped and a sticky flag is raised.
class OutputBuffer {
public:
    static constexpr std::size_t kBytes = 204;
    static constexpr std::size_t kRecordBytes = 4;
    static constexpr std::size_t kCapacity = kBytes / kRecordBytes;

    bool push(OutputRecord record);
    std::vector<OutputRecord> drain();
    const std::vector<OutputRecord>& records() const { return records_; }
    bool overflow() const { return overflow_; }
    std::uint64_t dropped() const { return dropped_; }
    void clear_overflow() { overflow_ = false; }

    std::vector<std::uint8_t> dump() const;
    static std::vector<OutputRecord> decode(std::span<const std::uint8_t> bytes);

private:
    std::vector<OutputRecord> records_;
    bool overflow_ = false;
    std::uint64_t dropped_ = 0;
};

struct TimestepBarrier {
    std::uint32_t committed = 0; // timesteps fully processed
    std::vector<bool> core_done;
};

struct RouterSample {
    std::uint64_t cycle = 0;
    NodeId router = 0;
    std::uint64_t grants = 0; // since the previous sample
    std::uint64_t drops = 0;
    std::size_t occupancy = 0;
    double energy_pj = 0; // cumulative
};

struct Telemetry {
    EnergyLedger ledger;
    std::uint64_t cycles = 0;
    std::uint32_t timesteps = 0;
    std::uint64_t flits_injected = 0;
    std::uint64_t flits_delivered = 0;
    std::uint64_t output_overflows = 0;
    std::vector<std::uint64_t> timestep_cycles;
    std::vector<RouterSample> router_samples;

    double energy_pj(const EnergyCoefficients& k) const { return total_energy_pj(ledger, k); }
};

/// Totals as a two-row CSV (header, values).
std::string telemetry_csv(const Telemetry& t, const Config& config);
/// Header `cycle,router_id,grants,drops,occupancy,energy_pj`, one row per sample.
std::string router_samples_csv(const Telemetry& t);

struct RunResult {
    std::vector<Spike> spikes; // all fired spikes, sorted
    Telemetry telemetry;
    std::array<std::vector<OutputRecord>, 4> outputs;
};

enum class WakeEvent { TimestepSwitch, NetworkComputingFinish };

struct HostResult {
    RunResult run;
    std::vector<std::pair<std::size_t, std::vector<OutputRecord>>> reads; // (buffer, records)
    std::vector<WakeEvent> wakes;
    std::uint64_t host_sleep_cycles = 0;
};

/// The SoC: 20 cores on a fullerene domain, their routers, the output
/// buffers and the timestep barrier. Cores are addressed by index 0..19 in
/// host instructions and by node id 12..31 in netlists and traces.
class Fabric {
public:
    Fabric(Netlist netlist, const Config& config, int threads = 1);
    ~Fabric();
    Fabric(const Fabric&) = delete;
    Fabric& operator=(const Fabric&) = delete;

    const topology::TopologyGraph& topology() const { return topology_; }
    std::size_t core_count() const { return cores_.size(); }
    CoreId core_node(std::size_t index) const;
    /// Throws RangeError when `node` is not a core.
    std::size_t core_index(CoreId node) const;
    core::Core& core_at(std::size_t index);
    const core::Core& core_at(std::size_t index) const;
    const router::Router& router_at(NodeId id) const;

    /// Loads registers, codebook and synapse indexes of `index` from the
    /// netlist, or of every core for kAllCores.
    void init_params(std::uint8_t index);
    /// Throws RangeError when `index` is not a core of this fabric.
    void enable_core(std::uint8_t index);
    void idma(std::size_t index, std::span<const std::uint8_t> bytes, std::size_t offset = 0);
    void mpdma(std::size_t index, std::span<const std::uint8_t> bytes, std::size_t offset = 0);

    /// Runs one timestep with the given external input spikes.
    void step(std::span<const Spike> inputs);
    RunResult run(std::span<const Spike> trace, std::uint32_t timesteps);

    const TimestepBarrier& barrier() const { return barrier_; }
    const Telemetry& telemetry() const { return telemetry_; }
    OutputBuffer& output_buffer(std::size_t i) { return outputs_.at(i); }
    const std::vector<Spike>& fired() const { return fired_; }

    /// Executes the instruction stream in order. NetworkStart arms a run of
    /// `timesteps` over `trace`; Sleep advances it to the armed wake event.
    HostResult host_program(std::span<const Instruction> program, std::span<const Spike> trace,
        std::uint32_t timesteps);

private:
    struct Link {
        std::size_t core;
        NodeId router;
        int port;
        std::deque<router::SpikeFlit> queue;
    };

    void validate_netlist() const;
    void emit(std::size_t core, std::uint32_t neuron, bool external);
    void receive(std::size_t core, const router::SpikeFlit& flit);
    void forward(std::size_t core, CoreId origin, const router::SpikeFlit& flit);
    void run_cycles(const std::vector<std::optional<std::uint64_t>>& emit_at,
        const std::vector<std::vector<std::uint32_t>>& fired);
    bool quiescent() const;
    void sample_routers();
    [[noreturn]] void deadlock(const std::string& why);

    Netlist netlist_;
    Config config_;
    int threads_;
    topology::TopologyGraph topology_;
    std::vector<CoreId> core_nodes_;
    std::vector<std::unique_ptr<core::Core>> cores_;
    std::map<NodeId, std::unique_ptr<router::Router>> routers_;
    std::vector<Link> links_;
    std::map<std::pair<std::size_t, NodeId>, std::size_t> link_of_;
    std::map<std::pair<CoreId, CoreId>, std::vector<NodeId>> relays_;
    std::map<NeuronRef, std::pair<int, std::uint32_t>> output_of_;
    std::array<OutputBuffer, 4> outputs_;
    std::vector<std::set<NeuronRef>> seen_;
    EnergyLedger core_ledger_;
    TimestepBarrier barrier_;
    Telemetry telemetry_;
    std::vector<Spike> fired_;
    std::uint64_t cycle_ = 0;
    std::uint64_t serial_ = 0;
    std::uint64_t last_sample_ = 0;
    std::map<NodeId, std::uint64_t> sampled_grants_;
    std::map<NodeId, std::uint64_t> sampled_drops_;
};

/// Loads every netlist core, enables it and runs `timesteps` timesteps.
RunResult run_inference(const Netlist& netlist, std::span<const Spike> trace, std::uint32_t timesteps,
    const Config& config, int threads = 1);

} // namespace nmsoc::fabric
