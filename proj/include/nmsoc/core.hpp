#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nmsoc/common.hpp"
#include "nmsoc/config.hpp"
#include "nmsoc/energy.hpp"

namespace nmsoc::core {

enum class ResetMode { ToZero, Subtract };

std::string_view to_string(ResetMode mode);
ResetMode parse_reset_mode(std::string_view text);

/// True for the codebook sizes and widths the core supports: 4, 8 or 16.
bool supported_codebook_parameter(int value);

struct CoreRegisterTable {
    CoreId core_id = 0; // read-only after construction
    bool enabled = false;
    std::int32_t threshold = 1;
    std::int32_t leak = 0;
    ResetMode reset_mode = ResetMode::ToZero;
    int weight_count = 16;
    int weight_width = 8;
    bool zero_skip = true;
};

/// The N shared W-bit weights of one core. Synapses store indexes into it.
class WeightCodebook {
public:
    WeightCodebook();
    /// Throws ConfigError unless N, W are in {4, 8, 16} and every value fits W bits.
    WeightCodebook(std::vector<std::int32_t> values, int width);

    std::size_t size() const { return values_.size(); }
    int width() const { return width_; }
    int index_bits() const;
    std::int32_t operator[](std::size_t index) const { return values_[index]; }
    const std::vector<std::int32_t>& values() const { return values_; }

private:
    std::vector<std::int32_t> values_;
    int width_;
};

/// Saturation bounds of the membrane-potential accumulator.
struct MpRange {
    std::int32_t min = INT16_MIN;
    std::int32_t max = INT16_MAX;

    static MpRange of_bits(int bits);
    std::int32_t saturate(std::int64_t value) const;
};

struct NeuronState {
    std::int32_t mp = 0;
    bool fired_this_step = false;

    bool operator==(const NeuronState&) const = default;
};

struct NeuronUpdate {
    NeuronState state;
    bool fired = false;
};

/// One timestep of a LIF neuron: saturating integrate, leak (floored at the
/// range minimum), then threshold and reset. A neuron with no contribution
/// this timestep skips integration but still leaks and checks threshold.
NeuronUpdate neuron_update(NeuronState state, std::optional<std::int64_t> contribution,
    const CoreRegisterTable& params, MpRange range);

using SpikeWindow = std::uint16_t;
inline constexpr int kWindowBits = 16;

struct ZspeScan {
    std::vector<int> positions; // ascending
    std::uint32_t cycles = 0;
};

/// Zero-skip scan: set-bit positions, one cycle per valid spike and a single
/// cycle for an empty window.
ZspeScan zspe_scan(SpikeWindow window);

/// Cycles for the SPE pair to process `synapses` lookups: four per cycle,
/// doubled for 16-bit weights.
std::uint32_t spe_group_cycles(std::size_t synapses, int weight_width);

struct SpeResult {
    std::int64_t contribution = 0;
    std::uint32_t cycles = 0;
};

/// Sum of codebook lookups for `indexes`. Throws ConfigError on index >= N.
SpeResult spe_accumulate(std::span<const std::uint8_t> indexes, const WeightCodebook& codebook);

/// Per-window occupancy of the four pipeline stages: cache, ZSPE, SPE, neuron updater.
using StageCosts = std::array<std::uint32_t, 4>;

/// Completion time of a four-stage flow-shop pipeline with `buffer_depth`
/// slots between neighboring stages. Unit costs give windows + 3.
std::uint64_t pipeline_cycles(std::span<const StageCosts> windows, int buffer_depth);

struct CoreTiming {
    int pipeline_buffer_depth = 2;
    int spe_spike_overhead_cycles = 3;

    static CoreTiming from(const Config& config);
};

/// A pre-synaptic source as seen by the core: a neuron on some core.
/// Immediate lines carry external stimulus consumed in the same timestep.
struct InputLine {
    CoreId src_core = 0;
    std::uint32_t src_neuron = 0;
    bool immediate = false;

    auto operator<=>(const InputLine&) const = default;
};

/// One bank of the spike ping-pong cache: a bit per input line, packed into
/// 16-bit windows.
class SpikeBank {
public:
    SpikeBank() = default;
    explicit SpikeBank(std::size_t lines) : windows_((lines + kWindowBits - 1) / kWindowBits, 0), lines_(lines) {}

    std::size_t lines() const { return lines_; }
    std::size_t window_count() const { return windows_.size(); }
    SpikeWindow window(std::size_t w) const { return windows_[w]; }
    bool test(std::size_t line) const { return (windows_[line / kWindowBits] >> (line % kWindowBits)) & 1u; }
    void set(std::size_t line) { windows_.at(line / kWindowBits) |= static_cast<SpikeWindow>(1u << (line % kWindowBits)); }
    void clear() { std::fill(windows_.begin(), windows_.end(), SpikeWindow{0}); }
    std::size_t popcount() const;

private:
    std::vector<SpikeWindow> windows_;
    std::size_t lines_ = 0;
};

struct TimestepResult {
    std::vector<std::uint32_t> fired; // local neuron ids, ascending
    std::uint64_t cycles = 0;
    EnergyLedger ledger;
};

class CoreDisabledError : public Error {
public:
    using Error::Error;
};

inline constexpr std::uint8_t kNoSynapse = 0xFF;

/// One neuromorphic core: register table, codebook, synapse index memory,
/// membrane potentials and the spike ping-pong cache.
class Core {
public:
    Core(CoreId id, CoreTiming timing, MpRange range);

    CoreId id() const { return registers_.core_id; }
    const CoreRegisterTable& registers() const { return registers_; }
    /// Writes everything but the read-only core id.
    void write_registers(const CoreRegisterTable& table);
    void set_enabled(bool enabled) { registers_.enabled = enabled; }

    /// Sizes the memories for `inputs` x `neuron_count` and clears them.
    /// Throws BusyError while enabled.
    void configure(std::vector<InputLine> inputs, std::uint32_t neuron_count,
        std::vector<bool> input_neurons);
    const std::vector<InputLine>& inputs() const { return inputs_; }
    std::uint32_t neuron_count() const { return static_cast<std::uint32_t>(neurons_.size()); }
    bool is_input_neuron(std::uint32_t neuron) const { return input_neurons_.at(neuron); }
    std::optional<std::uint32_t> line_of(CoreId src_core, std::uint32_t src_neuron) const;

    void set_codebook(WeightCodebook codebook);
    const WeightCodebook& codebook() const { return codebook_; }

    /// Synapse index memory, row-major [input line][neuron]; kNoSynapse marks
    /// an absent synapse.
    std::span<const std::uint8_t> synapse_memory() const { return synapse_memory_; }
    void write_synapse_memory(std::span<const std::uint8_t> bytes, std::size_t offset = 0);
    void set_synapse(std::uint32_t line, std::uint32_t post, std::uint8_t index);

    /// Membrane potentials as little-endian two's complement words of
    /// potential_word_bytes() each.
    std::size_t potential_word_bytes() const { return range_.max > INT16_MAX ? 4 : 2; }
    std::size_t potential_capacity() const { return neurons_.size() * potential_word_bytes(); }
    void write_potentials(std::span<const std::uint8_t> bytes, std::size_t offset = 0);
    std::vector<std::uint8_t> read_potentials() const;

    const std::vector<NeuronState>& neurons() const { return neurons_; }
    MpRange range() const { return range_; }

    /// Records a spike from (src_core, src_neuron) in the bank its line
    /// belongs to: the active bank for immediate lines, the filling bank
    /// otherwise. Returns false when the core has no such input line.
    bool deliver(CoreId src_core, std::uint32_t src_neuron);

    const SpikeBank& active_bank() const { return banks_[active_]; }
    const SpikeBank& filling_bank() const { return banks_[1 - active_]; }

    /// Processes the active bank. Throws CoreDisabledError when disabled.
    TimestepResult compute();
    /// Processes an explicit spike vector over this core's input lines.
    TimestepResult compute(const SpikeBank& spikes);

    /// Timestep boundary: the filled bank becomes active, the other is cleared.
    void swap_banks();

private:
    struct Synapse {
        std::uint32_t post;
        std::uint8_t index;
    };

    void require_disabled(const char* what) const;
    void rebuild_rows() const;

    CoreRegisterTable registers_;
    CoreTiming timing_;
    MpRange range_;
    WeightCodebook codebook_;
    std::vector<InputLine> inputs_;
    std::unordered_map<std::uint64_t, std::uint32_t> line_index_;
    std::vector<bool> input_neurons_;
    std::vector<std::uint8_t> synapse_memory_;
    std::vector<NeuronState> neurons_;
    std::array<SpikeBank, 2> banks_;
    int active_ = 0;

    mutable std::vector<std::vector<Synapse>> rows_;
    mutable bool rows_dirty_ = true;
};

} // namespace nmsoc::core
