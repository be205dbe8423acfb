#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmsoc/config.hpp"
#include "nmsoc/energy.hpp"

namespace nmsoc::core {

struct EfficiencyPoint {
    double sparsity = 0; // fraction of zero input bits
    std::uint64_t spikes = 0;
    EnergyLedger zero_skip;
    EnergyLedger baseline;
    double gsops = 0;
    double pj_per_sop = 0; // NaN when no SOP was performed
    double baseline_gsops = 0;
    double baseline_pj_per_sop = 0;

    /// Baseline energy per SOP over zero-skip energy per SOP.
    double energy_ratio() const { return baseline_pj_per_sop / pj_per_sop; }
};

/// 0, step, 2*step, ... 100 percent as fractions.
std::vector<double> percent_grid(int step_percent = 1);

double gsops_of(const EnergyLedger& ledger, double freq_mhz);
double pj_per_sop_of(const EnergyLedger& ledger, const EnergyCoefficients& k);

/// Runs the synthetic sweep workload once per sparsity, with and without
/// zero-skip. The workload is one core of `sweep_inputs` input lines, each
/// with `sweep_fanout` synapses onto `sweep_neurons` neurons; a point with
/// sparsity s drives round((1 - s) * sweep_inputs) randomly chosen lines.
std::vector<EfficiencyPoint> efficiency_curve(const Config& config, std::span<const double> sparsities,
    std::uint64_t seed);

} // namespace nmsoc::core
