#include "nmsoc/router.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace nmsoc::router {

std::string_view to_string(TransmissionMode mode)
{
    switch (mode) {
    case TransmissionMode::P2P:
        return "p2p";
    case TransmissionMode::Broadcast:
        return "bcast";
    case TransmissionMode::Merge:
        return "merge";
    }
    return "?";
}

TransmissionMode parse_mode(std::string_view text)
{
    if (text == "p2p") {
        return TransmissionMode::P2P;
    }
    if (text == "bcast") {
        return TransmissionMode::Broadcast;
    }
    if (text == "merge") {
        return TransmissionMode::Merge;
    }
    throw std::invalid_argument("unknown transmission mode '" + std::string(text) + "'");
}

std::size_t ConnectionMatrix::configured_cells() const
{
    std::size_t n = 0;
    for (const auto& row : cells_) {
        n += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](const auto& c) { return c.has_value(); }));
    }
    return n;
}

RouterParams RouterParams::from(const Config& c)
{
    return RouterParams{c.buffer_depth, c.grants_per_cycle, c.handshake_cycles};
}

void PortBuffer::push(SpikeFlit flit)
{
    if (full()) {
        throw std::logic_error("push into a full port buffer");
    }
    fifo_.push_back(std::move(flit));
}

SpikeFlit PortBuffer::pop()
{
    SpikeFlit f = fifo_.front();
    fifo_.pop_front();
    return f;
}

Router::Router(NodeId id, std::vector<CoreId> neighbor_cores, RouterParams params)
    : id_(id), neighbors_(std::move(neighbor_cores)), params_(params)
{
    if (neighbors_.size() > static_cast<std::size_t>(kPorts)) {
        throw std::invalid_argument("a router has at most 5 neighbor cores");
    }
    for (int p = 0; p < kPorts; ++p) {
        inputs_.emplace_back(static_cast<std::size_t>(params_.buffer_depth));
        outputs_.emplace_back(static_cast<std::size_t>(params_.buffer_depth));
    }
}

std::optional<int> Router::port_of(CoreId core) const
{
    auto it = std::find(neighbors_.begin(), neighbors_.end(), core);
    if (it == neighbors_.end()) {
        return std::nullopt;
    }
    return static_cast<int>(it - neighbors_.begin());
}

void Router::configure_matrix(std::span<const MatrixEntry> entries)
{
    const auto where = "router " + std::to_string(id_) + ": ";
    if (entries.size() > static_cast<std::size_t>(ConnectionMatrix::kRows * ConnectionMatrix::kSlots)) {
        throw ConfigError(where + "connection matrix holds at most 25 cells");
    }
    ConnectionMatrix next;
    for (const auto& e : entries) {
        if (e.in_port < 0 || e.in_port >= static_cast<int>(neighbors_.size())) {
            throw ConfigError(where + "input port " + std::to_string(e.in_port) + " out of range");
        }
        if (e.slot < 0 || e.slot >= ConnectionMatrix::kSlots) {
            throw ConfigError(where + "slot " + std::to_string(e.slot) + " out of range");
        }
        if (!port_of(e.dest_core)) {
            throw ConfigError(where + "core " + std::to_string(e.dest_core) + " is not a neighbor");
        }
        if (next.cell(e.in_port, e.slot)) {
            throw ConfigError(where + "duplicate entry for (" + std::to_string(e.in_port) + ", " +
                std::to_string(e.slot) + ")");
        }
        next.set(e.in_port, e.slot, MatrixCell{e.dest_core, e.mode});
    }
    for (int row = 0; row < ConnectionMatrix::kRows; ++row) {
        std::vector<MatrixCell> cells;
        for (int slot = 0; slot < ConnectionMatrix::kSlots; ++slot) {
            if (const auto& c = next.cell(row, slot)) {
                cells.push_back(*c);
            }
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            for (std::size_t j = i + 1; j < cells.size(); ++j) {
                if (cells[i].dest_core == cells[j].dest_core) {
                    throw ConfigError(where + "row " + std::to_string(row) + " repeats destination " +
                        std::to_string(cells[i].dest_core));
                }
            }
            if (cells.size() > 1 && cells[i].mode != TransmissionMode::Broadcast) {
                throw ConfigError(where + "row " + std::to_string(row) +
                    " has several destinations but is not broadcast");
            }
        }
    }
    matrix_ = next;
}

std::vector<RouteTarget> Router::route_lookup(int in_port, const SpikeFlit& /*flit*/) const
{
    std::vector<RouteTarget> out;
    for (int slot = 0; slot < ConnectionMatrix::kSlots; ++slot) {
        if (const auto& c = matrix_.cell(in_port, slot)) {
            out.push_back(RouteTarget{*port_of(c->dest_core), c->mode});
        }
    }
    return out;
}

void Router::set_active_timestep(std::uint32_t timestep)
{
    active_timestep_ = timestep;
    refresh_hangup();
}

std::size_t Router::free_space(int out_port) const
{
    const auto& buf = outputs_[out_port];
    return buf.capacity() - buf.size() - reserved_[out_port];
}

bool Router::head_blocked(int port) const
{
    const auto& buf = inputs_[port];
    if (buf.empty()) {
        return false;
    }
    const auto& head = buf.front();
    if (head.timestep > active_timestep_) {
        return true;
    }
    for (const auto& t : route_lookup(port, head)) {
        if (free_space(t.out_port) == 0) {
            return true;
        }
    }
    return false;
}

void Router::refresh_hangup()
{
    for (int p = 0; p < kPorts; ++p) {
        inputs_[p].hung_up = head_blocked(p);
    }
}

std::vector<int> Router::hangup_check()
{
    refresh_hangup();
    std::vector<int> hung;
    for (int p = 0; p < kPorts; ++p) {
        if (inputs_[p].hung_up) {
            hung.push_back(p);
        }
    }
    return hung;
}

bool Router::can_accept(int in_port) const
{
    if (in_port < 0 || in_port >= static_cast<int>(neighbors_.size())) {
        return false;
    }
    const auto& buf = inputs_[in_port];
    return !buf.full() && !buf.hung_up;
}

void Router::accept(int in_port, SpikeFlit flit)
{
    if (!can_accept(in_port)) {
        throw std::logic_error("router " + std::to_string(id_) + " port " + std::to_string(in_port) +
            " cannot accept a flit");
    }
    inputs_[in_port].push(std::move(flit));
    ++accepted_;
    clock_gated_ = false;
    inputs_[in_port].hung_up = head_blocked(in_port);
}

TickReport Router::tick(std::uint64_t /*cycle*/)
{
    TickReport report;
    if (idle()) {
        clock_gated_ = true;
        ++report.ledger.router_gated_cycles;
        ledger_ += report.ledger;
        return report;
    }
    clock_gated_ = false;
    ++report.ledger.router_active_cycles;

    // Handshakes finishing this cycle free their channel before arbitration.
    for (auto& t : in_flight_) {
        --t.remaining;
    }
    while (!in_flight_.empty() && in_flight_.front().remaining <= 0) {
        const auto& done = in_flight_.front();
        for (const auto& t : done.targets) {
            --reserved_[t.out_port];
            outputs_[t.out_port].push(done.flit);
        }
        switch (done.targets.front().mode) {
        case TransmissionMode::P2P:
            ++report.ledger.hops_p2p;
            break;
        case TransmissionMode::Merge:
            ++report.ledger.hops_merge;
            break;
        case TransmissionMode::Broadcast:
            ++report.ledger.bcast_transfers;
            report.ledger.bcast_deliveries += done.targets.size();
            break;
        }
        ++report.completions;
        in_flight_.pop_front();
    }

    for (int p = 0; p < kPorts; ++p) {
        auto& buf = inputs_[p];
        while (!buf.empty() && route_lookup(p, buf.front()).empty()) {
            buf.pop();
            ++report.drops;
            ++report.ledger.flits_dropped;
        }
    }

    auto free_channels = params_.grants_per_cycle - static_cast<int>(in_flight_.size());
    const int start = arbiter_;
    for (int k = 0; k < kPorts && free_channels > 0; ++k) {
        const int p = (start + k) % kPorts;
        if (inputs_[p].empty() || head_blocked(p)) {
            continue;
        }
        auto targets = route_lookup(p, inputs_[p].front());
        for (const auto& t : targets) {
            ++reserved_[t.out_port];
        }
        in_flight_.push_back(Transfer{inputs_[p].pop(), std::move(targets), params_.handshake_cycles});
        ++report.grants;
        --free_channels;
        arbiter_ = (p + 1) % kPorts;
    }

    refresh_hangup();
    completed_ += report.completions;
    dropped_ += report.drops;
    granted_ += report.grants;
    ledger_ += report.ledger;
    return report;
}

std::optional<SpikeFlit> Router::eject(int out_port)
{
    auto& buf = outputs_.at(out_port);
    if (buf.empty()) {
        return std::nullopt;
    }
    ++ejected_;
    auto flit = buf.pop();
    refresh_hangup();
    return flit;
}

bool Router::idle() const
{
    if (!in_flight_.empty()) {
        return false;
    }
    for (int p = 0; p < kPorts; ++p) {
        if (!inputs_[p].empty() || !outputs_[p].empty()) {
            return false;
        }
    }
    return true;
}

std::size_t Router::occupancy() const
{
    std::size_t n = 0;
    for (int p = 0; p < kPorts; ++p) {
        n += inputs_[p].size() + outputs_[p].size();
    }
    return n;
}

double hop_energy(TransmissionMode mode, int fanout, const EnergyCoefficients& k)
{
    if (fanout < 1) {
        throw std::invalid_argument("hop_energy requires fanout >= 1");
    }
    switch (mode) {
    case TransmissionMode::P2P:
    case TransmissionMode::Merge:
        return k.hop_p2p_pj;
    case TransmissionMode::Broadcast:
        return k.hop_bcast_pj * fanout;
    }
    return 0.0;
}

} // namespace nmsoc::router
