#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nmsoc/common.hpp"
#include "nmsoc/config.hpp"
#include "nmsoc/energy.hpp"

namespace nmsoc::router {

inline constexpr int kPorts = 5;

enum class TransmissionMode { P2P, Broadcast, Merge };

std::string_view to_string(TransmissionMode mode);
TransmissionMode parse_mode(std::string_view text);

/// Unit of on-chip traffic. The destination is not carried: routers derive
/// it from their connection matrix.
struct SpikeFlit {
    CoreId src_core = 0;
    std::uint32_t src_neuron = 0;
    std::uint32_t timestep = 0;
    std::optional<std::uint32_t> tag;
    std::uint64_t created_cycle = 0;
    std::uint64_t serial = 0;

    bool operator==(const SpikeFlit&) const = default;
};

struct MatrixCell {
    CoreId dest_core = 0;
    TransmissionMode mode = TransmissionMode::P2P;

    bool operator==(const MatrixCell&) const = default;
};

struct MatrixEntry {
    int in_port = 0;
    int slot = 0;
    CoreId dest_core = 0;
    TransmissionMode mode = TransmissionMode::P2P;
};

/// 5x5 routing table: row = input port (neighbor core), column = slot.
/// Each cell is empty or names a neighbor core by its 5-bit id.
class ConnectionMatrix {
public:
    static constexpr int kRows = kPorts;
    static constexpr int kSlots = kPorts;
    static constexpr int kStorageBits = kRows * kSlots * kCoreIdBits;

    const std::optional<MatrixCell>& cell(int in_port, int slot) const
    {
        return cells_.at(in_port).at(slot);
    }
    void set(int in_port, int slot, MatrixCell value) { cells_.at(in_port).at(slot) = value; }
    std::size_t configured_cells() const;

private:
    std::array<std::array<std::optional<MatrixCell>, kSlots>, kRows> cells_{};
};

struct RouteTarget {
    int out_port = 0;
    TransmissionMode mode = TransmissionMode::P2P;

    auto operator<=>(const RouteTarget&) const = default;
};

struct RouterParams {
    int buffer_depth = 4;
    int grants_per_cycle = 2;
    int handshake_cycles = 5;

    static RouterParams from(const Config& config);
};

class PortBuffer {
public:
    explicit PortBuffer(std::size_t capacity) : capacity_(capacity) {}

    bool empty() const { return fifo_.empty(); }
    bool full() const { return fifo_.size() >= capacity_; }
    std::size_t size() const { return fifo_.size(); }
    std::size_t capacity() const { return capacity_; }
    const SpikeFlit& front() const { return fifo_.front(); }

    void push(SpikeFlit flit);
    SpikeFlit pop();

    bool hung_up = false;

private:
    std::deque<SpikeFlit> fifo_;
    std::size_t capacity_;
};

struct TickReport {
    std::uint32_t grants = 0;
    std::uint32_t completions = 0;
    std::uint32_t drops = 0;
    EnergyLedger ledger;
};

/// Cycle model of the connection-matrix router.
///
/// A round-robin arbiter grants up to `grants_per_cycle` transfers from input
/// to output buffers. Each transfer occupies one of `grants_per_cycle`
/// handshake channels for `handshake_cycles` cycles, which bounds throughput
/// at grants_per_cycle / handshake_cycles flits per cycle. Output space is
/// reserved at grant time, so buffers never exceed their depth.
class Router {
public:
    Router(NodeId id, std::vector<CoreId> neighbor_cores, RouterParams params);

    NodeId id() const { return id_; }
    const std::vector<CoreId>& neighbor_cores() const { return neighbors_; }
    std::optional<int> port_of(CoreId core) const;
    const RouterParams& params() const { return params_; }

    /// Replaces the matrix. Throws ConfigError on a non-neighbor destination,
    /// a duplicate (in_port, slot), more than 25 entries, or a multi-cell row
    /// that is not all Broadcast. On error the previous matrix is kept.
    void configure_matrix(std::span<const MatrixEntry> entries);
    const ConnectionMatrix& matrix() const { return matrix_; }

    /// Output ports for a flit arriving on `in_port`; empty when unconfigured.
    std::vector<RouteTarget> route_lookup(int in_port, const SpikeFlit& flit) const;

    void set_active_timestep(std::uint32_t timestep);
    std::uint32_t active_timestep() const { return active_timestep_; }

    /// Recomputes the hang-up signals and returns the hung input ports. A port
    /// is hung when its head flit targets a full output buffer or carries a
    /// timestep ahead of the active one.
    std::vector<int> hangup_check();

    bool can_accept(int in_port) const;
    /// Throws std::logic_error if the port cannot accept.
    void accept(int in_port, SpikeFlit flit);

    TickReport tick(std::uint64_t cycle);

    std::optional<SpikeFlit> eject(int out_port);

    const PortBuffer& input(int port) const { return inputs_.at(port); }
    const PortBuffer& output(int port) const { return outputs_.at(port); }

    bool idle() const;
    bool clock_gated() const { return clock_gated_; }
    std::size_t occupancy() const;
    std::size_t in_flight() const { return in_flight_.size(); }
    int arbiter_position() const { return arbiter_; }

    const EnergyLedger& ledger() const { return ledger_; }
    std::uint64_t accepted_total() const { return accepted_; }
    std::uint64_t completed_total() const { return completed_; }
    std::uint64_t dropped_total() const { return dropped_; }
    std::uint64_t ejected_total() const { return ejected_; }
    std::uint64_t grants_total() const { return granted_; }

private:
    struct Transfer {
        SpikeFlit flit;
        std::vector<RouteTarget> targets;
        int remaining = 0;
    };

    bool head_blocked(int port) const;
    std::size_t free_space(int out_port) const;
    void refresh_hangup();

    NodeId id_;
    std::vector<CoreId> neighbors_;
    RouterParams params_;
    ConnectionMatrix matrix_;
    std::vector<PortBuffer> inputs_;
    std::vector<PortBuffer> outputs_;
    std::array<std::size_t, kPorts> reserved_{};
    std::deque<Transfer> in_flight_;
    int arbiter_ = 0;
    bool clock_gated_ = true;
    std::uint32_t active_timestep_ = 0;
    EnergyLedger ledger_;
    std::uint64_t accepted_ = 0;
    std::uint64_t completed_ = 0;
    std::uint64_t dropped_ = 0;
    std::uint64_t ejected_ = 0;
    std::uint64_t granted_ = 0;
};

/// Energy of one router traversal. Broadcast is charged per delivered copy.
/// Throws std::invalid_argument when fanout < 1.
double hop_energy(TransmissionMode mode, int fanout, const EnergyCoefficients& k);

} // namespace nmsoc::router
