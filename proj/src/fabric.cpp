#include "nmsoc/fabric.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nmsoc/format.hpp"

namespace nmsoc::fabric {

bool OutputBuffer::push(OutputRecord record)
{
    if (records_.size() >= kCapacity) {
        overflow_ = true;
        ++dropped_;
        return false;
    }
    records_.push_back(record);
    return true;
}

std::vector<OutputRecord> OutputBuffer::drain()
{
    std::vector<OutputRecord> out;
    out.swap(records_);
    return out;
}

std::vector<std::uint8_t> OutputBuffer::dump() const
{
    std::vector<std::uint8_t> bytes;
    for (const auto& r : records_) {
        const std::uint32_t word = (r.neuron_id & 0x1FFFu) | (static_cast<std::uint32_t>(r.timestep) << 16);
        for (int b = 0; b < 4; ++b) {
            bytes.push_back(static_cast<std::uint8_t>(word >> (8 * b)));
        }
    }
    return bytes;
}

std::vector<OutputRecord> OutputBuffer::decode(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() % kRecordBytes != 0 || bytes.size() > kBytes) {
        throw std::invalid_argument("output buffer image must be whole records within 204 bytes");
    }
    std::vector<OutputRecord> records;
    for (std::size_t i = 0; i < bytes.size(); i += kRecordBytes) {
        std::uint32_t word = 0;
        for (std::size_t b = 0; b < kRecordBytes; ++b) {
            word |= static_cast<std::uint32_t>(bytes[i + b]) << (8 * b);
        }
        records.push_back(OutputRecord{static_cast<std::uint16_t>(word & 0x1FFFu), static_cast<std::uint16_t>(word >> 16)});
    }
    return records;
}

std::string telemetry_csv(const Telemetry& t, const Config& config)
{
    const auto k = EnergyCoefficients::from(config);
    const double energy = total_energy_pj(t.ledger, k);
    const double seconds = static_cast<double>(t.cycles) / (config.freq_mhz * 1e6);
    const double gsops = seconds > 0 ? static_cast<double>(t.ledger.sops) / seconds / 1e9 : 0.0;
    const double pj_per_sop = t.ledger.sops > 0 ? core_energy_pj(t.ledger, k) / static_cast<double>(t.ledger.sops) : 0.0;

    std::ostringstream out;
    out << "timesteps,cycles,flits_injected,flits_delivered,output_overflows";
    for (const auto& c : ledger_columns()) {
        out << ',' << c;
    }
    out << ",core_energy_pj,router_energy_pj,energy_pj,gsops,pj_per_sop\n";
    out << t.timesteps << ',' << t.cycles << ',' << t.flits_injected << ',' << t.flits_delivered << ','
        << t.output_overflows;
    for (auto v : ledger_values(t.ledger)) {
        out << ',' << v;
    }
    out << ',' << format_fixed(core_energy_pj(t.ledger, k)) << ',' << format_fixed(router_energy_pj(t.ledger, k))
        << ',' << format_fixed(energy) << ',' << format_fixed(gsops) << ',' << format_fixed(pj_per_sop) << '\n';
    return out.str();
}

std::string router_samples_csv(const Telemetry& t)
{
    std::ostringstream out;
    out << "cycle,router_id,grants,drops,occupancy,energy_pj\n";
    for (const auto& s : t.router_samples) {
        out << s.cycle << ',' << s.router << ',' << s.grants << ',' << s.drops << ',' << s.occupancy << ','
            << format_fixed(s.energy_pj) << '\n';
    }
    return out.str();
}

Fabric::Fabric(Netlist netlist, const Config& config, int threads)
    : netlist_(std::move(netlist)), config_(config), threads_(std::max(1, threads)),
      topology_(topology::build_fullerene_domain())
{
    validate(config_);
    core_nodes_ = topology_.nodes_of_kind(topology::NodeKind::Core);
    const auto timing = core::CoreTiming::from(config_);
    const auto range = core::MpRange::of_bits(config_.mp_bits);
    for (auto node : core_nodes_) {
        cores_.push_back(std::make_unique<core::Core>(node, timing, range));
        cores_.back()->configure({}, 0, {});
    }
    seen_.resize(cores_.size());
    barrier_.core_done.assign(cores_.size(), false);

    const auto params = router::RouterParams::from(config_);
    for (auto node : topology_.nodes_of_kind(topology::NodeKind::RouterL1)) {
        routers_.emplace(node, std::make_unique<router::Router>(node, topology_.neighbors(node), params));
    }
    validate_netlist();

    std::map<NodeId, std::vector<router::MatrixEntry>> entries;
    for (const auto& r : netlist_.routes) {
        const auto port = routers_.at(r.router)->port_of(r.in_core);
        entries[r.router].push_back(router::MatrixEntry{*port, r.slot, r.dest_core, r.mode});
    }
    for (auto& [id, list] : entries) {
        try {
            routers_.at(id)->configure_matrix(list);
        } catch (const ConfigError& e) {
            throw ConfigError("router " + std::to_string(id) + ": " + e.what());
        }
    }

    for (std::size_t c = 0; c < cores_.size(); ++c) {
        for (auto r : topology_.neighbors(core_nodes_[c])) {
            link_of_[{c, r}] = links_.size();
            links_.push_back(Link{c, r, *routers_.at(r)->port_of(core_nodes_[c]), {}});
        }
    }
    for (const auto& r : netlist_.relays) {
        auto& list = relays_[{r.core, r.origin}];
        if (std::find(list.begin(), list.end(), r.router) == list.end()) {
            list.push_back(r.router);
        }
    }
    for (const auto& o : netlist_.outputs) {
        output_of_[NeuronRef{o.core, o.neuron}] = {o.buffer, o.id};
    }
}

Fabric::~Fabric() = default;

void Fabric::validate_netlist() const
{
    auto is_core = [&](CoreId id) {
        return id < topology_.node_count() && topology_.kind(id) == topology::NodeKind::Core;
    };
    auto is_router = [&](NodeId id) { return routers_.contains(id); };
    for (const auto& c : netlist_.cores) {
        if (!is_core(c.id)) {
            throw ConfigError("netlist core " + std::to_string(c.id) + " is not a core of the fabric");
        }
        if (c.neurons > static_cast<std::uint32_t>(config_.neurons_per_core)) {
            throw ConfigError("netlist core " + std::to_string(c.id) + " holds " + std::to_string(c.neurons) +
                " neurons, capacity is " + std::to_string(config_.neurons_per_core));
        }
    }
    for (const auto& r : netlist_.routes) {
        if (!is_router(r.router)) {
            throw ConfigError("route names node " + std::to_string(r.router) + ", which is not a router");
        }
        if (!topology_.adjacent(r.router, r.in_core)) {
            throw ConfigError("route at router " + std::to_string(r.router) + " has non-neighbor input core " +
                std::to_string(r.in_core));
        }
    }
    for (const auto& r : netlist_.relays) {
        if (!is_core(r.core) || !is_router(r.router) || !topology_.adjacent(r.core, r.router)) {
            throw ConfigError("relay of core " + std::to_string(r.core) + " names router " + std::to_string(r.router) +
                ", which is not attached to it");
        }
    }
}

CoreId Fabric::core_node(std::size_t index) const
{
    return core_nodes_.at(index);
}

core::Core& Fabric::core_at(std::size_t index)
{
    return *cores_.at(index);
}

const core::Core& Fabric::core_at(std::size_t index) const
{
    return *cores_.at(index);
}

const router::Router& Fabric::router_at(NodeId id) const
{
    return *routers_.at(id);
}

std::size_t Fabric::core_index(CoreId node) const
{
    auto it = std::lower_bound(core_nodes_.begin(), core_nodes_.end(), node);
    if (it == core_nodes_.end() || *it != node) {
        throw RangeError("node " + std::to_string(node) + " is not a core");
    }
    return static_cast<std::size_t>(it - core_nodes_.begin());
}

void Fabric::init_params(std::uint8_t index)
{
    if (index == kAllCores) {
        for (std::size_t i = 0; i < cores_.size(); ++i) {
            init_params(static_cast<std::uint8_t>(i));
        }
        return;
    }
    if (index >= cores_.size()) {
        throw RangeError("core index " + std::to_string(index) + " out of range for " +
            std::to_string(cores_.size()) + " cores");
    }
    auto& core = *cores_[index];
    const auto node = core_nodes_[index];
    const auto* entry = netlist_.find_core(node);
    if (entry == nullptr) {
        core.configure({}, 0, {});
        return;
    }
    std::vector<bool> input_flags(entry->neurons, false);
    for (const auto& in : netlist_.inputs) {
        if (in.core == node) {
            input_flags[in.neuron] = true;
        }
    }
    core.configure(input_lines(netlist_, node), entry->neurons, std::move(input_flags));
    core::CoreRegisterTable regs;
    regs.threshold = entry->threshold;
    regs.leak = entry->leak;
    regs.reset_mode = entry->reset;
    regs.weight_count = entry->weight_count;
    regs.weight_width = entry->weight_width;
    core.write_registers(regs);
    core.set_codebook(core::WeightCodebook(entry->codebook, entry->weight_width));
    idma(index, synapse_image(netlist_, node));
}

void Fabric::enable_core(std::uint8_t index)
{
    if (index >= cores_.size()) {
        throw RangeError("core index " + std::to_string(index) + " out of range for " +
            std::to_string(cores_.size()) + " cores");
    }
    cores_[index]->set_enabled(true);
}

void Fabric::idma(std::size_t index, std::span<const std::uint8_t> bytes, std::size_t offset)
{
    core_at(index).write_synapse_memory(bytes, offset);
}

void Fabric::mpdma(std::size_t index, std::span<const std::uint8_t> bytes, std::size_t offset)
{
    core_at(index).write_potentials(bytes, offset);
}

void Fabric::emit(std::size_t core, std::uint32_t neuron, bool external)
{
    const auto node = core_nodes_[core];
    const auto t = barrier_.committed;
    if (!external) {
        fired_.push_back(Spike{t, node, neuron});
    }
    if (auto it = output_of_.find(NeuronRef{node, neuron}); it != output_of_.end()) {
        if (!outputs_[it->second.first].push(OutputRecord{static_cast<std::uint16_t>(it->second.second),
                static_cast<std::uint16_t>(t)})) {
            ++telemetry_.output_overflows;
        }
    }
    seen_[core].insert(NeuronRef{node, neuron});
    cores_[core]->deliver(node, neuron);
    router::SpikeFlit flit;
    flit.src_core = node;
    flit.src_neuron = neuron;
    flit.timestep = t;
    flit.created_cycle = cycle_;
    flit.serial = serial_++;
    forward(core, node, flit);
}

void Fabric::forward(std::size_t core, CoreId origin, const router::SpikeFlit& flit)
{
    auto it = relays_.find({core_nodes_[core], origin});
    if (it == relays_.end()) {
        return;
    }
    for (auto r : it->second) {
        links_[link_of_.at({core, r})].queue.push_back(flit);
    }
}

void Fabric::receive(std::size_t core, const router::SpikeFlit& flit)
{
    ++telemetry_.flits_delivered;
    if (flit.timestep > barrier_.committed) {
        throw std::logic_error("core received a spike from a future timestep");
    }
    if (!seen_[core].insert(NeuronRef{flit.src_core, flit.src_neuron}).second) {
        return;
    }
    cores_[core]->deliver(flit.src_core, flit.src_neuron);
    forward(core, flit.src_core, flit);
}

bool Fabric::quiescent() const
{
    for (const auto& l : links_) {
        if (!l.queue.empty()) {
            return false;
        }
    }
    for (const auto& [id, r] : routers_) {
        if (!r->idle()) {
            return false;
        }
    }
    return true;
}

void Fabric::sample_routers()
{
    const auto k = EnergyCoefficients::from(config_);
    for (const auto& [id, r] : routers_) {
        RouterSample s;
        s.cycle = cycle_;
        s.router = id;
        s.grants = r->grants_total() - sampled_grants_[id];
        s.drops = r->dropped_total() - sampled_drops_[id];
        s.occupancy = r->occupancy();
        s.energy_pj = router_energy_pj(r->ledger(), k);
        sampled_grants_[id] = r->grants_total();
        sampled_drops_[id] = r->dropped_total();
        telemetry_.router_samples.push_back(s);
    }
    last_sample_ = cycle_;
}

void Fabric::deadlock(const std::string& why)
{
    std::ostringstream msg;
    msg << why << " at cycle " << cycle_ << " (timestep " << barrier_.committed << "); hung ports:";
    bool any = false;
    for (auto& [id, r] : routers_) {
        for (int p : r->hangup_check()) {
            msg << " router " << id << " port " << p << " (core " << r->neighbor_cores()[static_cast<std::size_t>(p)]
                << ")";
            any = true;
        }
    }
    if (!any) {
        msg << " none";
    }
    throw DeadlockError(msg.str());
}

void Fabric::run_cycles(const std::vector<std::optional<std::uint64_t>>& emit_at,
    const std::vector<std::vector<std::uint32_t>>& fired)
{
    const auto start = cycle_;
    std::vector<bool> emitted(cores_.size(), true);
    for (std::size_t c = 0; c < emit_at.size(); ++c) {
        emitted[c] = !emit_at[c].has_value();
    }
    std::int64_t stalled = 0;
    const auto eject_limit = config_.core_eject_per_cycle;

    for (;;) {
        bool progress = false;
        bool computing = false;
        for (std::size_t c = 0; c < emitted.size(); ++c) {
            if (emitted[c]) {
                continue;
            }
            if (cycle_ - start >= *emit_at[c]) {
                for (auto n : fired[c]) {
                    emit(c, n, false);
                }
                emitted[c] = true;
                progress = true;
            } else {
                computing = true;
            }
        }
        for (auto& l : links_) {
            if (l.queue.empty()) {
                continue;
            }
            auto& r = *routers_.at(l.router);
            if (r.can_accept(l.port)) {
                r.accept(l.port, l.queue.front());
                l.queue.pop_front();
                ++telemetry_.flits_injected;
                progress = true;
            }
        }
        for (auto& [id, r] : routers_) {
            const auto report = r->tick(cycle_);
            if (report.grants + report.completions + report.drops > 0) {
                progress = true;
            }
        }
        for (auto& [id, r] : routers_) {
            const auto& neighbors = r->neighbor_cores();
            for (std::size_t p = 0; p < neighbors.size(); ++p) {
                for (int k = 0; k < eject_limit; ++k) {
                    auto flit = r->eject(static_cast<int>(p));
                    if (!flit) {
                        break;
                    }
                    receive(core_index(neighbors[p]), *flit);
                    progress = true;
                }
            }
        }
        ++cycle_;
        if (config_.router_sample_cycles > 0 &&
            cycle_ - last_sample_ >= static_cast<std::uint64_t>(config_.router_sample_cycles)) {
            sample_routers();
        }
        if (!computing && std::all_of(emitted.begin(), emitted.end(), [](bool b) { return b; }) && quiescent()) {
            return;
        }
        stalled = (progress || computing) ? 0 : stalled + 1;
        if (stalled >= config_.watchdog_cycles) {
            deadlock("no progress for " + std::to_string(config_.watchdog_cycles) + " cycles");
        }
    }
}

void Fabric::step(std::span<const Spike> inputs)
{
    const auto t = barrier_.committed;
    if (t >= (1u << 16)) {
        throw RangeError("timestep " + std::to_string(t) + " does not fit the 16-bit output record");
    }
    const auto begin = cycle_;

    std::vector<Spike> external(inputs.begin(), inputs.end());
    std::sort(external.begin(), external.end());
    for (const auto& s : external) {
        if (s.timestep != t) {
            throw std::invalid_argument("input spike for timestep " + std::to_string(s.timestep) +
                " given at timestep " + std::to_string(t));
        }
        if (!netlist_.is_input(s.core, s.neuron)) {
            throw ConfigError("input spike targets core " + std::to_string(s.core) + " neuron " +
                std::to_string(s.neuron) + ", which is not an input neuron");
        }
        emit(core_index(s.core), s.neuron, true);
    }
    run_cycles({}, {});

    std::vector<core::TimestepResult> results(cores_.size());
    auto work = [&](std::size_t first) {
        for (std::size_t c = first; c < cores_.size(); c += static_cast<std::size_t>(threads_)) {
            if (cores_[c]->registers().enabled) {
                results[c] = cores_[c]->compute();
            }
        }
    };
    if (threads_ == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads_; ++i) {
            pool.emplace_back(work, static_cast<std::size_t>(i));
        }
    }

    std::vector<std::optional<std::uint64_t>> emit_at(cores_.size());
    std::vector<std::vector<std::uint32_t>> fired(cores_.size());
    for (std::size_t c = 0; c < cores_.size(); ++c) {
        barrier_.core_done[c] = false;
        if (cores_[c]->registers().enabled) {
            emit_at[c] = results[c].cycles;
            fired[c] = std::move(results[c].fired);
            core_ledger_ += results[c].ledger;
        }
    }
    run_cycles(emit_at, fired);

    const auto span = cycle_ - begin;
    for (std::size_t c = 0; c < cores_.size(); ++c) {
        if (cores_[c]->registers().enabled) {
            core_ledger_.core_idle_cycles += span - results[c].cycles;
        } else {
            core_ledger_.core_gated_cycles += span;
        }
        cores_[c]->swap_banks();
        seen_[c].clear();
        barrier_.core_done[c] = true;
    }
    ++barrier_.committed;
    for (auto& [id, r] : routers_) {
        r->set_active_timestep(barrier_.committed);
    }

    telemetry_.timestep_cycles.push_back(span);
    telemetry_.cycles = cycle_;
    telemetry_.timesteps = barrier_.committed;
    telemetry_.ledger = core_ledger_;
    for (const auto& [id, r] : routers_) {
        telemetry_.ledger += r->ledger();
    }
}

RunResult Fabric::run(std::span<const Spike> trace, std::uint32_t timesteps)
{
    const auto first = barrier_.committed;
    const auto end = first + timesteps;
    for (const auto& s : trace) {
        if (s.timestep < first || s.timestep >= end) {
            throw std::invalid_argument("trace spike at timestep " + std::to_string(s.timestep) +
                " lies outside the run of " + std::to_string(timesteps) + " timesteps");
        }
    }
    std::vector<Spike> sorted(trace.begin(), trace.end());
    std::sort(sorted.begin(), sorted.end());

    RunResult result;
    auto it = sorted.begin();
    for (auto t = first; t < end; ++t) {
        auto stop = std::find_if(it, sorted.end(), [&](const Spike& s) { return s.timestep != t; });
        step(std::span<const Spike>(&*it, static_cast<std::size_t>(stop - it)));
        it = stop;
        for (std::size_t b = 0; b < outputs_.size(); ++b) {
            auto records = outputs_[b].drain();
            result.outputs[b].insert(result.outputs[b].end(), records.begin(), records.end());
        }
    }
    result.spikes = fired_;
    std::sort(result.spikes.begin(), result.spikes.end());
    result.telemetry = telemetry_;
    return result;
}

HostResult Fabric::host_program(std::span<const Instruction> program, std::span<const Spike> trace,
    std::uint32_t timesteps)
{
    HostResult host;
    bool started = false;
    WakeEvent wake_on = WakeEvent::NetworkComputingFinish;
    const auto first = barrier_.committed;
    const auto end = first + timesteps;

    auto inputs_at = [&](std::uint32_t t) {
        std::vector<Spike> now;
        for (const auto& s : trace) {
            if (s.timestep == t) {
                now.push_back(s);
            }
        }
        return now;
    };

    for (const auto& instr : program) {
        if (auto* i = std::get_if<InitParams>(&instr)) {
            init_params(i->core);
        } else if (auto* i = std::get_if<CoreEnable>(&instr)) {
            enable_core(i->core);
        } else if (auto* i = std::get_if<NetworkStart>(&instr)) {
            started = started || i->networks != 0;
        } else if (std::holds_alternative<WakeOnTimestep>(instr)) {
            wake_on = WakeEvent::TimestepSwitch;
        } else if (std::holds_alternative<WakeOnFinish>(instr)) {
            wake_on = WakeEvent::NetworkComputingFinish;
        } else if (std::holds_alternative<Sleep>(instr)) {
            if (!started || barrier_.committed >= end) {
                host.host_sleep_cycles += static_cast<std::uint64_t>(config_.watchdog_cycles);
                throw WatchdogError("host asleep with no running network; no wake signal within " +
                    std::to_string(config_.watchdog_cycles) + " cycles");
            }
            const auto before = cycle_;
            if (wake_on == WakeEvent::TimestepSwitch) {
                const auto now = inputs_at(barrier_.committed);
                step(now);
            } else {
                while (barrier_.committed < end) {
                    const auto now = inputs_at(barrier_.committed);
                    step(now);
                }
            }
            host.host_sleep_cycles += cycle_ - before;
            host.wakes.push_back(barrier_.committed >= end ? WakeEvent::NetworkComputingFinish : wake_on);
        } else if (auto* i = std::get_if<ReadOutput>(&instr)) {
            host.reads.emplace_back(i->buffer, outputs_.at(i->buffer).drain());
        }
    }
    host.run.spikes = fired_;
    std::sort(host.run.spikes.begin(), host.run.spikes.end());
    host.run.telemetry = telemetry_;
    for (std::size_t b = 0; b < outputs_.size(); ++b) {
        host.run.outputs[b] = outputs_[b].records();
    }
    return host;
}

RunResult run_inference(const Netlist& netlist, std::span<const Spike> trace, std::uint32_t timesteps,
    const Config& config, int threads)
{
    Fabric fabric(netlist, config, threads);
    for (const auto& c : netlist.cores) {
        const auto index = static_cast<std::uint8_t>(fabric.core_index(c.id));
        fabric.init_params(index);
        fabric.enable_core(index);
    }
    return fabric.run(trace, timesteps);
}

} // namespace nmsoc::fabric
