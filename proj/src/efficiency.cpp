#include "nmsoc/efficiency.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nmsoc/core.hpp"
#include "nmsoc/rng.hpp"

namespace nmsoc::core {

std::vector<double> percent_grid(int step_percent)
{
    if (step_percent < 1 || step_percent > 100) {
        throw std::invalid_argument("sparsity step must be in [1, 100] percent");
    }
    std::vector<double> grid;
    for (int p = 0; p <= 100; p += step_percent) {
        grid.push_back(p / 100.0);
    }
    if (grid.back() != 1.0) {
        grid.push_back(1.0);
    }
    return grid;
}

double gsops_of(const EnergyLedger& l, double freq_mhz)
{
    if (l.core_active_cycles == 0) {
        return 0;
    }
    return static_cast<double>(l.sops) / static_cast<double>(l.core_active_cycles) * freq_mhz / 1000.0;
}

double pj_per_sop_of(const EnergyLedger& l, const EnergyCoefficients& k)
{
    if (l.sops == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return core_energy_pj(l, k) / static_cast<double>(l.sops);
}

std::vector<EfficiencyPoint> efficiency_curve(const Config& config, std::span<const double> sparsities,
    std::uint64_t seed)
{
    validate(config);
    const auto lines = static_cast<std::size_t>(config.sweep_inputs);
    const auto neurons = static_cast<std::uint32_t>(config.sweep_neurons);
    const auto fanout = static_cast<std::size_t>(config.sweep_fanout);
    if (fanout > neurons) {
        throw ConfigError("sweep_fanout exceeds sweep_neurons");
    }

    Rng rng(seed);
    std::vector<InputLine> inputs(lines);
    for (std::size_t i = 0; i < lines; ++i) {
        inputs[i] = InputLine{0, static_cast<std::uint32_t>(i), true};
    }
    Core core(0, CoreTiming::from(config), MpRange::of_bits(config.mp_bits));
    core.configure(inputs, neurons, std::vector<bool>(neurons, false));
    core.set_codebook(WeightCodebook({-7, -3, -1, 0, 1, 2, 3, 5, -8, -5, -2, 4, 6, 7, -6, -4}, 8));
    std::vector<std::uint32_t> posts(neurons);
    std::iota(posts.begin(), posts.end(), 0u);
    for (std::size_t line = 0; line < lines; ++line) {
        rng.shuffle(posts);
        for (std::size_t j = 0; j < fanout; ++j) {
            core.set_synapse(static_cast<std::uint32_t>(line), posts[j], static_cast<std::uint8_t>(rng.below(16)));
        }
    }

    const auto k = EnergyCoefficients::from(config);
    CoreRegisterTable regs;
    regs.threshold = std::numeric_limits<std::int16_t>::max();

    std::vector<std::uint32_t> order(lines);
    std::iota(order.begin(), order.end(), 0u);
    std::vector<EfficiencyPoint> points;
    for (double s : sparsities) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw std::invalid_argument("sparsity must be in [0, 1]");
        }
        EfficiencyPoint p;
        p.sparsity = s;
        p.spikes = static_cast<std::uint64_t>(std::llround((1.0 - s) * static_cast<double>(lines)));
        rng.shuffle(order);
        SpikeBank bank(lines);
        for (std::size_t i = 0; i < p.spikes; ++i) {
            bank.set(order[i]);
        }

        for (bool zero_skip : {true, false}) {
            regs.zero_skip = zero_skip;
            regs.enabled = false;
            core.write_registers(regs);
            core.set_enabled(true);
            auto result = core.compute(bank);
            core.set_enabled(false);
            (zero_skip ? p.zero_skip : p.baseline) = result.ledger;
        }
        p.gsops = gsops_of(p.zero_skip, config.freq_mhz);
        p.pj_per_sop = pj_per_sop_of(p.zero_skip, k);
        p.baseline_gsops = gsops_of(p.baseline, config.freq_mhz);
        p.baseline_pj_per_sop = pj_per_sop_of(p.baseline, k);
        points.push_back(p);
    }
    return points;
}

} // namespace nmsoc::core
