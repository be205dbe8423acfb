#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "nmsoc/core.hpp"
#include "nmsoc/efficiency.hpp"

using namespace nmsoc;
using namespace nmsoc::core;

namespace {

// Time-stepped four-stage pipeline with `depth`-slot buffers between stages.
// Iterates each cycle to a fixed point so same-cycle hand-offs are seen.
std::uint64_t simulate_pipeline(const std::vector<StageCosts>& jobs, int depth)
{
    constexpr int S = 4;
    struct Slot {
        std::optional<std::size_t> job;
        std::uint64_t done = 0;
    };
    std::array<Slot, S> stage{};
    std::array<std::deque<std::size_t>, S> queue{}; // queue[s] feeds stage s
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        queue[0].push_back(j);
    }
    std::size_t finished = 0;
    std::uint64_t last = 0;
    for (std::uint64_t t = 0; finished < jobs.size(); ++t) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (int s = S - 1; s >= 0; --s) {
                auto& slot = stage[s];
                if (slot.job && slot.done <= t) {
                    if (s == S - 1) {
                        ++finished;
                        last = slot.done;
                        slot.job.reset();
                        changed = true;
                    } else if (queue[s + 1].size() < static_cast<std::size_t>(depth)) {
                        queue[s + 1].push_back(*slot.job);
                        slot.job.reset();
                        changed = true;
                    }
                }
                if (!slot.job && !queue[s].empty()) {
                    slot.job = queue[s].front();
                    queue[s].pop_front();
                    slot.done = t + jobs[*slot.job][s];
                    changed = true;
                }
            }
        }
    }
    return last;
}

CoreRegisterTable table(std::int32_t threshold, std::int32_t leak, ResetMode reset)
{
    CoreRegisterTable t;
    t.threshold = threshold;
    t.leak = leak;
    t.reset_mode = reset;
    t.enabled = true;
    return t;
}

struct DenseCore {
    std::vector<InputLine> lines;
    std::uint32_t neurons = 0;
    std::vector<std::vector<int>> syn; // [line][neuron] codebook index or -1
    std::vector<std::int32_t> codebook;
    int width = 8;
};

DenseCore random_dense(std::mt19937_64& rng)
{
    DenseCore d;
    const auto n_lines = 1 + rng() % 70;
    d.neurons = static_cast<std::uint32_t>(1 + rng() % 40);
    for (std::uint32_t i = 0; i < n_lines; ++i) {
        d.lines.push_back(InputLine{static_cast<CoreId>(12 + i % 3), i, false});
    }
    const int sizes[] = {4, 8, 16};
    const auto N = sizes[rng() % 3];
    d.width = sizes[rng() % 3];
    const int lo = -(1 << (d.width - 1));
    const int hi = (1 << (d.width - 1)) - 1;
    for (int i = 0; i < N; ++i) {
        d.codebook.push_back(std::uniform_int_distribution<int>(lo, hi)(rng));
    }
    d.syn.assign(n_lines, std::vector<int>(d.neurons, -1));
    for (auto& row : d.syn) {
        for (auto& s : row) {
            if (rng() % 3 == 0) {
                s = static_cast<int>(rng() % N);
            }
        }
    }
    return d;
}

Core build(const DenseCore& d, const CoreRegisterTable& regs)
{
    Core c(12, CoreTiming{}, MpRange::of_bits(16));
    c.configure(d.lines, d.neurons, std::vector<bool>(d.neurons, false));
    c.set_codebook(WeightCodebook(d.codebook, d.width));
    for (std::uint32_t l = 0; l < d.lines.size(); ++l) {
        for (std::uint32_t n = 0; n < d.neurons; ++n) {
            if (d.syn[l][n] >= 0) {
                c.set_synapse(l, n, static_cast<std::uint8_t>(d.syn[l][n]));
            }
        }
    }
    c.write_registers(regs);
    return c;
}

} // namespace

TEST_CASE("zero-skip scan matches a bit loop on every window")
{
    for (std::uint32_t w = 0; w <= 0xFFFF; ++w) {
        std::vector<int> naive;
        for (int b = 0; b < 16; ++b) {
            if (w & (1u << b)) {
                naive.push_back(b);
            }
        }
        const auto scan = zspe_scan(static_cast<SpikeWindow>(w));
        REQUIRE(scan.positions == naive);
        REQUIRE(scan.cycles == std::max<std::uint32_t>(1, static_cast<std::uint32_t>(naive.size())));
    }
}

TEST_CASE("zero-skip scan examples")
{
    CHECK(zspe_scan(0x0000).cycles == 1);
    CHECK(zspe_scan(0x0000).positions.empty());
    CHECK(zspe_scan(0x8001).positions == std::vector<int>{0, 15});
    CHECK(zspe_scan(0xFFFF).cycles == 16);
}

TEST_CASE("SPE groups four lookups per cycle")
{
    CHECK(spe_group_cycles(0, 8) == 0);
    CHECK(spe_group_cycles(1, 8) == 1);
    CHECK(spe_group_cycles(4, 8) == 1);
    CHECK(spe_group_cycles(5, 8) == 2);
    CHECK(spe_group_cycles(5, 16) == 4);
    CHECK(spe_group_cycles(44, 4) == 11);

    const WeightCodebook cb({-3, 0, 5, 7}, 4);
    const std::vector<std::uint8_t> idx{0, 2, 2, 3, 1};
    const auto r = spe_accumulate(idx, cb);
    CHECK(r.contribution == -3 + 5 + 5 + 7 + 0);
    CHECK(r.cycles == 2);
    const std::vector<std::uint8_t> bad{4};
    CHECK_THROWS_AS(spe_accumulate(bad, cb), ConfigError);
}

TEST_CASE("codebook validation")
{
    CHECK_THROWS_AS(WeightCodebook({1, 2, 3}, 8), ConfigError);
    CHECK_THROWS_AS(WeightCodebook({1, 2, 3, 4}, 5), ConfigError);
    CHECK_THROWS_AS(WeightCodebook({8, 0, 0, 0}, 4), ConfigError);
    CHECK_NOTHROW(WeightCodebook({7, -8, 0, 0}, 4));
    CHECK(WeightCodebook(std::vector<std::int32_t>(16, 0), 8).index_bits() == 4);
    CHECK(WeightCodebook(std::vector<std::int32_t>(8, 0), 8).index_bits() == 3);
    CHECK(WeightCodebook(std::vector<std::int32_t>(4, 0), 8).index_bits() == 2);
}

TEST_CASE("neuron update examples")
{
    const auto range = MpRange::of_bits(16);
    auto u = neuron_update({5, false}, 6, table(10, 1, ResetMode::ToZero), range);
    CHECK(u.fired);
    CHECK(u.state.mp == 0);

    u = neuron_update({5, false}, 9, table(10, 1, ResetMode::Subtract), range);
    CHECK(u.fired);
    CHECK(u.state.mp == 3);

    u = neuron_update({5, false}, std::nullopt, table(10, 2, ResetMode::ToZero), range);
    CHECK_FALSE(u.fired);
    CHECK(u.state.mp == 3);

    u = neuron_update({32000, false}, 10000, table(32767, 0, ResetMode::Subtract), range);
    CHECK(u.fired);
    CHECK(u.state.mp == 0);

    u = neuron_update({-32768, false}, -5, table(10, 3, ResetMode::ToZero), range);
    CHECK(u.state.mp == -32768);

    // Fires without input once the potential sits above a non-positive threshold.
    u = neuron_update({0, false}, std::nullopt, table(0, 0, ResetMode::ToZero), range);
    CHECK(u.fired);
}

TEST_CASE("membrane potential ranges")
{
    CHECK(MpRange::of_bits(16).min == -32768);
    CHECK(MpRange::of_bits(16).max == 32767);
    CHECK(MpRange::of_bits(32).max == INT32_MAX);
    CHECK(MpRange::of_bits(8).saturate(1000) == 127);
    CHECK_THROWS_AS(MpRange::of_bits(1), std::invalid_argument);
}

TEST_CASE("pipeline examples")
{
    CHECK(pipeline_cycles({}, 2) == 0);
    for (std::size_t n : {1u, 2u, 16u, 256u}) {
        const std::vector<StageCosts> unit(n, StageCosts{1, 1, 1, 1});
        CHECK(pipeline_cycles(unit, 2) == n + 3);
    }
    const std::vector<StageCosts> one{{1, 16, 20, 1}};
    CHECK(pipeline_cycles(one, 2) == 38);
    // A slow last stage throttles the rest.
    const std::vector<StageCosts> slow(10, StageCosts{1, 1, 1, 5});
    CHECK(pipeline_cycles(slow, 1) == 3 + 50);
}

TEST_CASE("pipeline matches a time-stepped simulation")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<StageCosts> jobs(1 + rng() % 30);
        for (auto& j : jobs) {
            for (auto& c : j) {
                c = static_cast<std::uint32_t>(1 + rng() % 7);
            }
        }
        const int depth = static_cast<int>(1 + rng() % 3);
        CAPTURE(trial);
        CHECK(pipeline_cycles(jobs, depth) == simulate_pipeline(jobs, depth));
    }
}

TEST_CASE("core compute matches a dense reference")
{
    std::mt19937_64 rng(21);
    const auto range = MpRange::of_bits(16);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_dense(rng);
        const auto regs = table(static_cast<std::int32_t>(rng() % 200), static_cast<std::int32_t>(rng() % 5),
            rng() % 2 ? ResetMode::ToZero : ResetMode::Subtract);
        auto zs = build(d, regs);
        auto base_regs = regs;
        base_regs.zero_skip = false;
        auto base = build(d, base_regs);

        std::vector<NeuronState> ref(d.neurons);
        std::uint64_t total_synapses = 0;
        for (const auto& row : d.syn) {
            total_synapses += static_cast<std::uint64_t>(std::count_if(row.begin(), row.end(), [](int s) { return s >= 0; }));
        }
        for (int step = 0; step < 5; ++step) {
            SpikeBank bank(d.lines.size());
            std::vector<bool> on(d.lines.size());
            for (std::size_t l = 0; l < d.lines.size(); ++l) {
                if (rng() % 4 == 0) {
                    bank.set(l);
                    on[l] = true;
                }
            }
            std::vector<std::uint32_t> expect_fired;
            std::uint64_t expect_sops = 0;
            for (std::uint32_t n = 0; n < d.neurons; ++n) {
                std::int64_t sum = 0;
                bool any = false;
                for (std::size_t l = 0; l < d.lines.size(); ++l) {
                    if (on[l] && d.syn[l][n] >= 0) {
                        sum += d.codebook[static_cast<std::size_t>(d.syn[l][n])];
                        any = true;
                        ++expect_sops;
                    }
                }
                const auto u = neuron_update(ref[n], any ? std::optional<std::int64_t>(sum) : std::nullopt, regs, range);
                ref[n] = u.state;
                if (u.fired) {
                    expect_fired.push_back(n);
                }
            }
            const auto a = zs.compute(bank);
            const auto b = base.compute(bank);
            CHECK(a.fired == expect_fired);
            CHECK(b.fired == expect_fired);
            CHECK(a.ledger.sops == expect_sops);
            CHECK(a.ledger.synapse_lookups == expect_sops);
            CHECK(b.ledger.sops == expect_sops);
            CHECK(b.ledger.synapse_lookups == total_synapses);
            CHECK(a.cycles <= b.cycles);
            CHECK(zs.neurons() == ref);
        }
    }
}

TEST_CASE("disabled core refuses to compute")
{
    Core c(12, CoreTiming{}, MpRange::of_bits(16));
    c.configure({{13, 0, false}}, 2, {false, false});
    CHECK_THROWS_AS(c.compute(), CoreDisabledError);
}

TEST_CASE("memories are bounded and locked while enabled")
{
    Core c(12, CoreTiming{}, MpRange::of_bits(16));
    c.configure({{13, 0, false}, {14, 1, true}}, 3, {false, false, true});
    CHECK(c.synapse_memory().size() == 6);
    const std::vector<std::uint8_t> six(6, 1);
    CHECK_NOTHROW(c.write_synapse_memory(six));
    const std::vector<std::uint8_t> two(2, 1);
    CHECK_THROWS_AS(c.write_synapse_memory(two, 5), BoundsError);
    CHECK_THROWS_AS(c.write_potentials(std::vector<std::uint8_t>(7, 0)), BoundsError);

    const std::vector<std::uint8_t> mp{0xFE, 0xFF, 0x10, 0x00};
    c.write_potentials(mp, 2);
    CHECK(c.neurons()[1].mp == -2);
    CHECK(c.neurons()[2].mp == 16);
    const auto image = c.read_potentials();
    CHECK(std::vector<std::uint8_t>(image.begin() + 2, image.end()) == mp);

    c.set_enabled(true);
    CHECK_THROWS_AS(c.write_synapse_memory(six), BusyError);
    CHECK_THROWS_AS(c.write_potentials(mp), BusyError);
    CHECK_THROWS_AS(c.set_codebook(WeightCodebook()), BusyError);
    CHECK_THROWS_AS(c.configure({}, 1, {false}), BusyError);
    auto regs = c.registers();
    regs.core_id = 30;
    c.write_registers(regs);
    CHECK(c.id() == 12);
}

TEST_CASE("ping-pong banks")
{
    Core c(12, CoreTiming{}, MpRange::of_bits(16));
    c.configure({{13, 0, false}, {14, 1, true}}, 1, {false});
    CHECK(c.deliver(13, 0));
    CHECK(c.deliver(14, 1));
    CHECK_FALSE(c.deliver(15, 0));
    CHECK(c.filling_bank().test(0));
    CHECK(c.active_bank().test(1));
    c.swap_banks();
    CHECK(c.active_bank().test(0));
    CHECK_FALSE(c.active_bank().test(1));
    CHECK(c.filling_bank().popcount() == 0);
    CHECK_THROWS_AS(c.configure({{13, 0, false}, {13, 0, false}}, 1, {false}), ConfigError);
}

TEST_CASE("input neurons are never integrated")
{
    Core c(12, CoreTiming{}, MpRange::of_bits(16));
    c.configure({{13, 0, false}}, 2, {true, false});
    c.set_codebook(WeightCodebook({5, 0, 0, 0}, 8));
    c.set_synapse(0, 0, 0);
    c.set_synapse(0, 1, 0);
    c.write_registers(table(1, 0, ResetMode::ToZero));
    SpikeBank bank(1);
    bank.set(0);
    CHECK(c.compute(bank).fired == std::vector<std::uint32_t>{1});
}

TEST_CASE("efficiency sweep")
{
    const Config config;
    const auto grid = percent_grid(10);
    REQUIRE(grid.size() == 11);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == 1.0);
    CHECK_THROWS(percent_grid(0));

    const auto curve = efficiency_curve(config, grid, 1);
    REQUIRE(curve.size() == grid.size());
    const auto k = EnergyCoefficients::from(config);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const auto& p = curve[i];
        const auto expect_spikes = static_cast<std::uint64_t>(std::llround((1 - grid[i]) * config.sweep_inputs));
        CHECK(p.spikes == expect_spikes);
        CHECK(p.zero_skip.sops == expect_spikes * static_cast<std::uint64_t>(config.sweep_fanout));
        CHECK(p.baseline.sops == p.zero_skip.sops);
        CHECK(p.baseline.synapse_lookups ==
            static_cast<std::uint64_t>(config.sweep_inputs) * static_cast<std::uint64_t>(config.sweep_fanout));
        CHECK(p.zero_skip.core_active_cycles <= p.baseline.core_active_cycles);
        if (p.zero_skip.sops > 0) {
            CHECK(p.pj_per_sop == doctest::Approx(total_energy_pj(p.zero_skip, k) / static_cast<double>(p.zero_skip.sops)));
            CHECK(p.gsops == doctest::Approx(static_cast<double>(p.zero_skip.sops) /
                static_cast<double>(p.zero_skip.core_active_cycles) * config.freq_mhz / 1000.0));
        } else {
            CHECK(std::isnan(p.pj_per_sop));
        }
    }
    // With every input active the two modes do identical work.
    CHECK(curve.front().energy_ratio() == doctest::Approx(1.0));
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        CHECK(curve[i].energy_ratio() > curve[i - 1].energy_ratio());
    }
    CHECK(efficiency_curve(config, grid, 1).back().zero_skip == curve.back().zero_skip);
}
