#include "nmsoc/energy.hpp"

namespace nmsoc {

EnergyLedger& EnergyLedger::operator+=(const EnergyLedger& o)
{
    sops += o.sops;
    synapse_lookups += o.synapse_lookups;
    core_active_cycles += o.core_active_cycles;
    core_idle_cycles += o.core_idle_cycles;
    core_gated_cycles += o.core_gated_cycles;
    hops_p2p += o.hops_p2p;
    hops_merge += o.hops_merge;
    bcast_transfers += o.bcast_transfers;
    bcast_deliveries += o.bcast_deliveries;
    flits_dropped += o.flits_dropped;
    router_active_cycles += o.router_active_cycles;
    router_gated_cycles += o.router_gated_cycles;
    return *this;
}

EnergyCoefficients EnergyCoefficients::from(const Config& c)
{
    return EnergyCoefficients{
        c.e_sop_pj,
        c.e_core_active_cycle_pj,
        c.e_core_idle_cycle_pj,
        c.e_core_gated_cycle_pj,
        c.e_hop_p2p_pj,
        c.e_hop_bcast_pj,
    };
}

double core_energy_pj(const EnergyLedger& l, const EnergyCoefficients& k)
{
    return static_cast<double>(l.synapse_lookups) * k.sop_pj +
        static_cast<double>(l.core_active_cycles) * k.core_active_cycle_pj +
        static_cast<double>(l.core_idle_cycles) * k.core_idle_cycle_pj +
        static_cast<double>(l.core_gated_cycles) * k.core_gated_cycle_pj;
}

double router_energy_pj(const EnergyLedger& l, const EnergyCoefficients& k)
{
    // Merge hops are priced like P2P hops; broadcast is priced per delivered copy.
    return static_cast<double>(l.hops_p2p + l.hops_merge) * k.hop_p2p_pj +
        static_cast<double>(l.bcast_deliveries) * k.hop_bcast_pj;
}

double total_energy_pj(const EnergyLedger& l, const EnergyCoefficients& k)
{
    return core_energy_pj(l, k) + router_energy_pj(l, k);
}

std::vector<std::string> ledger_columns()
{
    return {"sops", "synapse_lookups", "core_active_cycles", "core_idle_cycles",
        "core_gated_cycles", "hops_p2p", "hops_merge", "bcast_transfers", "bcast_deliveries",
        "flits_dropped", "router_active_cycles", "router_gated_cycles"};
}

std::vector<std::uint64_t> ledger_values(const EnergyLedger& l)
{
    return {l.sops, l.synapse_lookups, l.core_active_cycles, l.core_idle_cycles,
        l.core_gated_cycles, l.hops_p2p, l.hops_merge, l.bcast_transfers, l.bcast_deliveries,
        l.flits_dropped, l.router_active_cycles, l.router_gated_cycles};
}

} // namespace nmsoc
