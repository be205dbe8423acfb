#include "nmsoc/core.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace nmsoc::core {
namespace {

std::uint64_t line_key(CoreId core, std::uint32_t neuron)
{
    return (static_cast<std::uint64_t>(core) << 32) | neuron;
}

} // namespace

std::string_view to_string(ResetMode mode)
{
    return mode == ResetMode::ToZero ? "zero" : "sub";
}

ResetMode parse_reset_mode(std::string_view text)
{
    if (text == "zero") {
        return ResetMode::ToZero;
    }
    if (text == "sub") {
        return ResetMode::Subtract;
    }
    throw std::invalid_argument("unknown reset mode '" + std::string(text) + "'");
}

bool supported_codebook_parameter(int value)
{
    return value == 4 || value == 8 || value == 16;
}

WeightCodebook::WeightCodebook() : values_(16, 0), width_(8) {}

WeightCodebook::WeightCodebook(std::vector<std::int32_t> values, int width)
    : values_(std::move(values)), width_(width)
{
    if (!supported_codebook_parameter(static_cast<int>(values_.size()))) {
        throw ConfigError("codebook size must be 4, 8 or 16, got " + std::to_string(values_.size()));
    }
    if (!supported_codebook_parameter(width_)) {
        throw ConfigError("weight width must be 4, 8 or 16, got " + std::to_string(width_));
    }
    const std::int32_t lo = -(1 << (width_ - 1));
    const std::int32_t hi = (1 << (width_ - 1)) - 1;
    for (auto v : values_) {
        if (v < lo || v > hi) {
            throw ConfigError("codebook value " + std::to_string(v) + " does not fit " +
                std::to_string(width_) + " bits");
        }
    }
}

int WeightCodebook::index_bits() const
{
    return std::bit_width(values_.size() - 1);
}

MpRange MpRange::of_bits(int bits)
{
    if (bits < 2 || bits > 32) {
        throw std::invalid_argument("membrane potential width must be in [2, 32]");
    }
    const auto max = (std::int64_t{1} << (bits - 1)) - 1;
    return MpRange{static_cast<std::int32_t>(-max - 1), static_cast<std::int32_t>(max)};
}

std::int32_t MpRange::saturate(std::int64_t value) const
{
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(value, min, max));
}

NeuronUpdate neuron_update(NeuronState state, std::optional<std::int64_t> contribution,
    const CoreRegisterTable& params, MpRange range)
{
    std::int64_t mp = state.mp;
    if (contribution) {
        mp = range.saturate(mp + *contribution);
    }
    mp = range.saturate(mp - params.leak);
    NeuronUpdate out;
    if (mp >= params.threshold) {
        out.fired = true;
        mp = params.reset_mode == ResetMode::ToZero ? 0 : range.saturate(mp - params.threshold);
    }
    out.state = NeuronState{static_cast<std::int32_t>(mp), out.fired};
    return out;
}

ZspeScan zspe_scan(SpikeWindow window)
{
    ZspeScan scan;
    unsigned bits = window;
    while (bits != 0) {
        scan.positions.push_back(std::countr_zero(bits));
        bits &= bits - 1;
    }
    scan.cycles = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(scan.positions.size()));
    return scan;
}

std::uint32_t spe_group_cycles(std::size_t synapses, int weight_width)
{
    const auto groups = static_cast<std::uint32_t>((synapses + 3) / 4);
    return weight_width == 16 ? 2 * groups : groups;
}

SpeResult spe_accumulate(std::span<const std::uint8_t> indexes, const WeightCodebook& codebook)
{
    SpeResult r;
    for (auto idx : indexes) {
        if (idx >= codebook.size()) {
            throw ConfigError("weight index " + std::to_string(idx) + " exceeds codebook size " +
                std::to_string(codebook.size()));
        }
        r.contribution += codebook[idx];
    }
    r.cycles = spe_group_cycles(indexes.size(), codebook.width());
    return r;
}

std::uint64_t pipeline_cycles(std::span<const StageCosts> windows, int buffer_depth)
{
    constexpr std::size_t kStages = 4;
    const auto jobs = windows.size();
    if (jobs == 0) {
        return 0;
    }
    const auto depth = static_cast<std::size_t>(std::max(1, buffer_depth));
    // start[s][j]: job j enters stage s; leave[s][j]: it moves on to the buffer.
    std::array<std::vector<std::uint64_t>, kStages> start;
    std::array<std::vector<std::uint64_t>, kStages> leave;
    for (auto& v : start) {
        v.assign(jobs, 0);
    }
    for (auto& v : leave) {
        v.assign(jobs, 0);
    }
    for (std::size_t j = 0; j < jobs; ++j) {
        for (std::size_t s = 0; s < kStages; ++s) {
            const std::uint64_t ready = s == 0 ? 0 : leave[s - 1][j];
            const std::uint64_t stage_free = j == 0 ? 0 : leave[s][j - 1];
            start[s][j] = std::max(ready, stage_free);
            const std::uint64_t done = start[s][j] + windows[j][s];
            if (s + 1 < kStages && j >= depth) {
                // The buffer ahead is full until job j - depth enters the next stage.
                leave[s][j] = std::max(done, start[s + 1][j - depth]);
            } else {
                leave[s][j] = done;
            }
        }
    }
    return leave[kStages - 1][jobs - 1];
}

CoreTiming CoreTiming::from(const Config& c)
{
    return CoreTiming{c.pipeline_buffer_depth, c.spe_spike_overhead_cycles};
}

std::size_t SpikeBank::popcount() const
{
    std::size_t n = 0;
    for (auto w : windows_) {
        n += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(w)));
    }
    return n;
}

Core::Core(CoreId id, CoreTiming timing, MpRange range) : timing_(timing), range_(range)
{
    registers_.core_id = id;
}

void Core::write_registers(const CoreRegisterTable& table)
{
    const auto id = registers_.core_id;
    registers_ = table;
    registers_.core_id = id;
}

void Core::require_disabled(const char* what) const
{
    if (registers_.enabled) {
        throw BusyError("core " + std::to_string(id()) + " is enabled; cannot " + what);
    }
}

void Core::configure(std::vector<InputLine> inputs, std::uint32_t neuron_count, std::vector<bool> input_neurons)
{
    require_disabled("reconfigure");
    if (input_neurons.size() != neuron_count) {
        throw std::invalid_argument("input neuron flags must cover every neuron");
    }
    inputs_ = std::move(inputs);
    line_index_.clear();
    for (std::uint32_t i = 0; i < inputs_.size(); ++i) {
        if (!line_index_.emplace(line_key(inputs_[i].src_core, inputs_[i].src_neuron), i).second) {
            throw ConfigError("core " + std::to_string(id()) + ": duplicate input line");
        }
    }
    input_neurons_ = std::move(input_neurons);
    neurons_.assign(neuron_count, NeuronState{});
    synapse_memory_.assign(inputs_.size() * neuron_count, kNoSynapse);
    banks_ = {SpikeBank(inputs_.size()), SpikeBank(inputs_.size())};
    active_ = 0;
    rows_dirty_ = true;
}

std::optional<std::uint32_t> Core::line_of(CoreId src_core, std::uint32_t src_neuron) const
{
    auto it = line_index_.find(line_key(src_core, src_neuron));
    if (it == line_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Core::set_codebook(WeightCodebook codebook)
{
    require_disabled("load a codebook");
    codebook_ = std::move(codebook);
}

void Core::write_synapse_memory(std::span<const std::uint8_t> bytes, std::size_t offset)
{
    require_disabled("write synapse memory");
    if (offset > synapse_memory_.size() || bytes.size() > synapse_memory_.size() - offset) {
        throw BoundsError("synapse memory write of " + std::to_string(bytes.size()) + " bytes at " +
            std::to_string(offset) + " exceeds capacity " + std::to_string(synapse_memory_.size()));
    }
    std::copy(bytes.begin(), bytes.end(), synapse_memory_.begin() + static_cast<std::ptrdiff_t>(offset));
    rows_dirty_ = true;
}

void Core::set_synapse(std::uint32_t line, std::uint32_t post, std::uint8_t index)
{
    const std::uint8_t byte[1] = {index};
    write_synapse_memory(byte, static_cast<std::size_t>(line) * neurons_.size() + post);
}

void Core::write_potentials(std::span<const std::uint8_t> bytes, std::size_t offset)
{
    require_disabled("write membrane potentials");
    const auto capacity = potential_capacity();
    if (offset > capacity || bytes.size() > capacity - offset) {
        throw BoundsError("membrane potential write of " + std::to_string(bytes.size()) + " bytes at " +
            std::to_string(offset) + " exceeds capacity " + std::to_string(capacity));
    }
    auto image = read_potentials();
    std::copy(bytes.begin(), bytes.end(), image.begin() + static_cast<std::ptrdiff_t>(offset));
    const auto word = potential_word_bytes();
    for (std::size_t n = 0; n < neurons_.size(); ++n) {
        std::uint32_t raw = 0;
        for (std::size_t b = 0; b < word; ++b) {
            raw |= static_cast<std::uint32_t>(image[n * word + b]) << (8 * b);
        }
        std::int32_t value = word == 2 ? static_cast<std::int16_t>(raw) : static_cast<std::int32_t>(raw);
        neurons_[n].mp = range_.saturate(value);
    }
}

std::vector<std::uint8_t> Core::read_potentials() const
{
    const auto word = potential_word_bytes();
    std::vector<std::uint8_t> image(neurons_.size() * word);
    for (std::size_t n = 0; n < neurons_.size(); ++n) {
        const auto raw = static_cast<std::uint32_t>(neurons_[n].mp);
        for (std::size_t b = 0; b < word; ++b) {
            image[n * word + b] = static_cast<std::uint8_t>(raw >> (8 * b));
        }
    }
    return image;
}

bool Core::deliver(CoreId src_core, std::uint32_t src_neuron)
{
    const auto line = line_of(src_core, src_neuron);
    if (!line) {
        return false;
    }
    auto& bank = inputs_[*line].immediate ? banks_[active_] : banks_[1 - active_];
    bank.set(*line);
    return true;
}

void Core::swap_banks()
{
    banks_[active_].clear();
    active_ = 1 - active_;
}

void Core::rebuild_rows() const
{
    if (!rows_dirty_) {
        return;
    }
    const auto n = neurons_.size();
    rows_.assign(inputs_.size(), {});
    for (std::size_t line = 0; line < inputs_.size(); ++line) {
        for (std::size_t post = 0; post < n; ++post) {
            const auto idx = synapse_memory_[line * n + post];
            if (idx != kNoSynapse) {
                if (idx >= codebook_.size()) {
                    throw ConfigError("core " + std::to_string(id()) + ": weight index " +
                        std::to_string(idx) + " exceeds codebook size " + std::to_string(codebook_.size()));
                }
                rows_[line].push_back(Synapse{static_cast<std::uint32_t>(post), idx});
            }
        }
    }
    rows_dirty_ = false;
}

TimestepResult Core::compute()
{
    return compute(banks_[active_]);
}

TimestepResult Core::compute(const SpikeBank& spikes)
{
    if (!registers_.enabled) {
        throw CoreDisabledError("core " + std::to_string(id()) + " is disabled");
    }
    if (spikes.lines() != inputs_.size()) {
        throw std::invalid_argument("spike vector does not match the core's input lines");
    }
    rebuild_rows();

    TimestepResult result;
    const auto n = neurons_.size();
    std::vector<std::int64_t> acc(n, 0);
    std::vector<bool> touched(n, false);
    std::vector<StageCosts> stages(spikes.window_count());
    const auto overhead = static_cast<std::uint32_t>(timing_.spe_spike_overhead_cycles);

    for (std::size_t w = 0; w < spikes.window_count(); ++w) {
        const auto bits = spikes.window(w);
        const auto lines_here = std::min<std::size_t>(kWindowBits, inputs_.size() - w * kWindowBits);
        std::vector<int> positions;
        std::uint32_t scan_cycles = 0;
        if (registers_.zero_skip) {
            auto scan = zspe_scan(bits);
            positions = std::move(scan.positions);
            scan_cycles = scan.cycles;
        } else {
            for (std::size_t p = 0; p < lines_here; ++p) {
                positions.push_back(static_cast<int>(p));
            }
            scan_cycles = kWindowBits;
        }

        std::uint32_t spe_cycles = 0;
        for (int pos : positions) {
            const auto line = w * kWindowBits + static_cast<std::size_t>(pos);
            const auto& row = rows_[line];
            spe_cycles += spe_group_cycles(row.size(), codebook_.width()) + overhead;
            result.ledger.synapse_lookups += row.size();
            if ((bits >> pos) & 1u) {
                result.ledger.sops += row.size();
                for (const auto& syn : row) {
                    acc[syn.post] += codebook_[syn.index];
                    touched[syn.post] = true;
                }
            }
        }
        stages[w] = StageCosts{1, scan_cycles, std::max<std::uint32_t>(1, spe_cycles), 1};
    }

    result.cycles = pipeline_cycles(stages, timing_.pipeline_buffer_depth);
    result.ledger.core_active_cycles = result.cycles;

    for (std::uint32_t post = 0; post < n; ++post) {
        if (input_neurons_[post]) {
            continue;
        }
        const auto update = neuron_update(neurons_[post],
            touched[post] ? std::optional<std::int64_t>(acc[post]) : std::nullopt, registers_, range_);
        neurons_[post] = update.state;
        if (update.fired) {
            result.fired.push_back(post);
        }
    }
    return result;
}

} // namespace nmsoc::core
