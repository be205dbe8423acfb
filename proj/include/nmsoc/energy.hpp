#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nmsoc/config.hpp"

namespace nmsoc {

/// Monotone event counters. Energy is derived from the counters and the
/// configured coefficients on readout, so ledgers add exactly.
struct EnergyLedger {
    std::uint64_t sops = 0;            // useful synaptic operations
    std::uint64_t synapse_lookups = 0; // lookups performed, including zero-spike ones
    std::uint64_t core_active_cycles = 0;
    std::uint64_t core_idle_cycles = 0;
    std::uint64_t core_gated_cycles = 0;

    std::uint64_t hops_p2p = 0;
    std::uint64_t hops_merge = 0;
    std::uint64_t bcast_transfers = 0;
    std::uint64_t bcast_deliveries = 0;
    std::uint64_t flits_dropped = 0;
    std::uint64_t router_active_cycles = 0;
    std::uint64_t router_gated_cycles = 0;

    EnergyLedger& operator+=(const EnergyLedger& other);
    friend EnergyLedger operator+(EnergyLedger a, const EnergyLedger& b) { return a += b; }
    bool operator==(const EnergyLedger&) const = default;
};

struct EnergyCoefficients {
    double sop_pj = 0;
    double core_active_cycle_pj = 0;
    double core_idle_cycle_pj = 0;
    double core_gated_cycle_pj = 0;
    double hop_p2p_pj = 0;
    double hop_bcast_pj = 0;

    static EnergyCoefficients from(const Config& config);
};

double core_energy_pj(const EnergyLedger& ledger, const EnergyCoefficients& k);
double router_energy_pj(const EnergyLedger& ledger, const EnergyCoefficients& k);
double total_energy_pj(const EnergyLedger& ledger, const EnergyCoefficients& k);

/// Column names and values of the ledger counters, in a stable order.
std::vector<std::string> ledger_columns();
std::vector<std::uint64_t> ledger_values(const EnergyLedger& ledger);

} // namespace nmsoc
